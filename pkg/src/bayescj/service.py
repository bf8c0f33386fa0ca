"""HTTP session service: assessments, served pairs, judgements, moderation.

State is event-sourced.  Every assessment owns an append-only JSONL event
log (served pairs, judgements, moderations) that is flushed to disk
before any response goes out; the in-memory preference matrix is a pure
fold over that log, so a restart replays the log and lands on the exact
same state.  Periodic snapshots are a read optimisation, never the
source of truth.

The judging API is strictly alternating per assessment: one outstanding
served pair at a time, judgements must name it, and an idempotency key
makes retried submissions harmless.  Multiple assessments are served
concurrently; writes within one assessment are serialised by a lock.

Configuration via environment: ``BAYESCJ_DATA_DIR`` (persistence root),
``BAYESCJ_TOKEN`` (optional static bearer token), and
``BAYESCJ_SNAPSHOT_INTERVAL`` (events between snapshots).
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import Depends, FastAPI, HTTPException, Request
from pydantic import BaseModel, Field

from .posteriors import (
    Criterion,
    Item,
    PreferenceMatrix,
    init_assessment,
    validate_criteria,
    validate_items,
)
from .ranking import (
    expected_ranking,
    mcp_ranking,
    mcr_ranking,
    radar_data,
    ranking_to_rows,
)
from .reliability import (
    ModerationRecord,
    eap_metric,
    moderate_pair,
    moderation_queue,
    reliability_report,
    stopping_check,
)
from .selection import STRATEGIES, select_entropy

DEFAULT_SNAPSHOT_INTERVAL = 50


# -- request payloads ---------------------------------------------------


class ItemIn(BaseModel):
    label: str = ""
    external_key: str | None = None
    payload: str | None = None


class CriterionIn(BaseModel):
    name: str
    weight: float = 1.0


class StoppingIn(BaseModel):
    metric: Literal["map", "eap"] = "eap"
    threshold: float = Field(default=70.0, ge=0.0, le=100.0)
    aggregation: Literal["min", "mean"] = "min"


class AssessmentIn(BaseModel):
    items: list[ItemIn]
    criteria: list[CriterionIn]
    strategy: Literal["entropy", "random", "nrp"] = "entropy"
    k: int = Field(default=10, ge=1)
    aggregation: Literal["mcp", "mcr"] = "mcp"
    stopping: StoppingIn | None = None
    prior: tuple[float, float] = (1.0, 1.0)
    seed: int = 0
    flag_threshold: float = Field(default=50.0, ge=0.0, le=100.0)


class JudgementIn(BaseModel):
    pair: tuple[int, int]
    winners: dict[int, int]
    idempotency_key: str | None = None


class ModerationIn(BaseModel):
    pair: tuple[int, int]
    criterion: int
    chosen_winner: int
    pseudo_wins: float = Field(default=1000.0, gt=0.0)
    note: str = ""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# -- one live assessment ------------------------------------------------


class LiveAssessment:
    """In-memory assessment state plus its durable event log."""

    def __init__(self, assessment_id: str, config: dict, directory: Path, snapshot_interval: int):
        self.id = assessment_id
        self.config = config
        self.dir = directory
        self.snapshot_interval = snapshot_interval
        self.lock = threading.Lock()
        self.matrix = self._fresh_matrix()
        self.status = "active"
        self.pending_pair: tuple[int, int] | None = None
        self.iterations = 0
        self.judgement_count = 0
        # Stopping rule re-arms only after evidence newer than this count,
        # so a reopen survives until at least one more judgement lands.
        self.stop_watermark = -1
        self.rounds_started = 0
        self.nrp_pool: list[tuple[int, int]] = []
        self.idempotency: dict[str, dict] = {}
        self.events = 0

    # -- construction ----------------------------------------------------

    def _fresh_matrix(self) -> PreferenceMatrix:
        items = [
            Item(idx, entry.get("label", ""), entry.get("external_key"))
            for idx, entry in enumerate(self.config["items"])
        ]
        criteria = [
            Criterion(idx, entry["name"], float(entry["weight"]))
            for idx, entry in enumerate(self.config["criteria"])
        ]
        return init_assessment(items, criteria, tuple(self.config.get("prior", (1.0, 1.0))))

    @classmethod
    def create(cls, config: dict, directory: Path, snapshot_interval: int) -> "LiveAssessment":
        assessment_id = uuid.uuid4().hex[:12]
        target = directory / assessment_id
        target.mkdir(parents=True)
        (target / "config.json").write_text(json.dumps(config, indent=2))
        return cls(assessment_id, config, target, snapshot_interval)

    @classmethod
    def load(cls, assessment_id: str, directory: Path, snapshot_interval: int) -> "LiveAssessment":
        target = directory / assessment_id
        config = json.loads((target / "config.json").read_text())
        live = cls(assessment_id, config, target, snapshot_interval)
        log_path = target / "log.jsonl"
        if log_path.exists():
            for line in log_path.read_text().splitlines():
                live._apply(json.loads(line))
        live._refresh_status()
        return live

    # -- event handling --------------------------------------------------

    def _apply(self, event: dict) -> None:
        """Fold one event into memory; replay and live paths share this."""
        kind = event["type"]
        if kind == "served":
            self.pending_pair = (int(event["pair"][0]), int(event["pair"][1]))
            self._consume_from_pool(self.pending_pair)
        elif kind == "judgement":
            i, j = (int(event["pair"][0]), int(event["pair"][1]))
            self.matrix.record(int(event["criterion"]), i, j, int(event["winner"]))
            self.judgement_count += 1
            if self.judgement_count % self.matrix.n_criteria == 0:
                self.iterations += 1
                self.pending_pair = None
        elif kind == "moderation":
            record = ModerationRecord(
                (int(event["pair"][0]), int(event["pair"][1])),
                int(event["criterion"]),
                int(event["winner"]),
                float(event["pseudo_wins"]),
                event.get("timestamp"),
                event.get("note", ""),
            )
            moderate_pair(self.matrix, record)
        elif kind == "status":
            self.status = event["status"]
            if event["status"] == "active":
                self.stop_watermark = self.judgement_count
        else:
            raise ValueError(f"unknown event type {kind!r}")
        self.events += 1

    def _append(self, event: dict) -> None:
        """Durably record an event, then fold it in."""
        event = {"seq": self.events, **event}
        with (self.dir / "log.jsonl").open("a") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._apply(event)
        if self.events % self.snapshot_interval == 0:
            self.write_snapshot()

    def write_snapshot(self) -> None:
        tmp = self.dir / "snapshot.json.tmp"
        tmp.write_text(self.matrix.to_json(self.id))
        tmp.replace(self.dir / "snapshot.json")

    # -- selection -------------------------------------------------------

    def _trim_pool(self) -> None:
        """Drop moderated pairs from the round pool, refilling an empty pool.

        Refill shuffles are seeded by (assessment seed, round index), so a
        restarted process replays served events into the identical pool.
        """
        selectable = self.matrix.selectable_pairs()
        if not selectable:
            self.nrp_pool = []
            return
        self.nrp_pool = [p for p in self.nrp_pool if p in selectable]
        if not self.nrp_pool:
            pool = [tuple(p) for p in selectable]
            seed = int(self.config.get("seed", 0))
            rng = np.random.default_rng(np.random.SeedSequence((seed, self.rounds_started)))
            rng.shuffle(pool)
            self.nrp_pool = pool
            self.rounds_started += 1

    def _consume_from_pool(self, pair: tuple[int, int]) -> None:
        if self.config["strategy"] != "nrp":
            return
        self._trim_pool()
        if pair in self.nrp_pool:
            self.nrp_pool.remove(pair)

    def _select_pair(self) -> tuple[int, int]:
        strategy = self.config["strategy"]
        if strategy == "entropy":
            return select_entropy(self.matrix)
        selectable = self.matrix.selectable_pairs()
        if not selectable:
            raise ValueError("every pair has been moderated")
        if strategy == "random":
            seed = int(self.config.get("seed", 0))
            rng = np.random.default_rng(np.random.SeedSequence((seed, self.iterations)))
            return tuple(selectable[int(rng.integers(len(selectable)))])
        self._trim_pool()
        return self.nrp_pool[-1]

    # -- api-facing operations -------------------------------------------

    @property
    def budget(self) -> int:
        return self.matrix.n_items * int(self.config["k"])

    def _refresh_status(self) -> None:
        if self.status != "active":
            return
        if self.iterations >= self.budget:
            self.status = "complete"
            return
        stopping = self.config.get("stopping")
        if stopping is not None and self.judgement_count > self.stop_watermark:
            outcome = stopping_check(
                self.matrix,
                stopping["metric"],
                stopping["threshold"],
                stopping["aggregation"],
            )
            if outcome.stop:
                self.status = "stopped"

    def progress(self) -> dict:
        d = self.matrix.n_criteria
        return {
            "iterations": self.iterations,
            "budget": self.budget,
            "judgements": self.judgement_count,
            "judgement_budget": d * self.budget,
        }

    def next_pair(self) -> dict:
        self._refresh_status()
        if self.status != "active":
            return self._stop_notice()
        if self.pending_pair is None:
            try:
                pair = self._select_pair()
            except ValueError:
                self.status = "stopped"
                notice = self._stop_notice()
                notice["reason"] = "every pair has been moderated"
                return notice
            self._append({"type": "served", "pair": list(pair), "timestamp": _now()})
        i, j = self.pending_pair  # type: ignore[misc]
        entries = self.config["items"]
        return {
            "status": "active",
            "pair": {
                "i": i,
                "j": j,
                "items": [
                    {"id": i, "label": entries[i].get("label", ""), "payload": entries[i].get("payload")},
                    {"id": j, "label": entries[j].get("label", ""), "payload": entries[j].get("payload")},
                ],
            },
            "criteria": [
                {"id": idx, "name": c["name"], "weight": c["weight"]}
                for idx, c in enumerate(self.config["criteria"])
            ],
            "progress": self.progress(),
        }

    def _stop_notice(self) -> dict:
        reason = {
            "complete": "budget exhausted",
            "stopped": "agreement threshold reached",
            "active": "",
        }[self.status]
        return {
            "status": self.status,
            "reason": reason,
            "report": reliability_report(self.matrix, self.config.get("flag_threshold", 50.0)),
            "progress": self.progress(),
        }

    def submit_judgements(self, payload: JudgementIn) -> dict:
        key = payload.idempotency_key
        if key is not None and key in self.idempotency:
            return self.idempotency[key]
        pair = (int(payload.pair[0]), int(payload.pair[1]))
        if self.pending_pair is None or pair != self.pending_pair:
            raise HTTPException(
                409, f"pair {list(pair)} is not the currently served pair"
            )
        d = self.matrix.n_criteria
        winners = {int(c): int(w) for c, w in payload.winners.items()}
        if sorted(winners) != list(range(d)):
            raise HTTPException(422, f"winners must cover criteria 0..{d - 1}")
        i, j = pair
        for criterion, winner in winners.items():
            if winner not in (i, j):
                raise HTTPException(
                    422, f"winner {winner} for criterion {criterion} is not in pair {list(pair)}"
                )
        stamp = _now()
        for criterion in range(d):
            self._append(
                {
                    "type": "judgement",
                    "pair": [i, j],
                    "criterion": criterion,
                    "winner": winners[criterion],
                    "source": "human",
                    "timestamp": stamp,
                }
            )
        self._refresh_status()
        response = self._summary_after_mutation(pair)
        if key is not None:
            self.idempotency[key] = response
        return response

    def _summary_after_mutation(self, pair: tuple[int, int]) -> dict:
        ranking = self._holistic_ranking(full=False)
        i, j = pair
        pair_eap = {
            str(d): eap_metric(self.matrix.posterior(i, j, d))
            for d in range(self.matrix.n_criteria)
        }
        return {
            "status": self.status,
            "expected_ranks": [float(v) for v in ranking.expected_ranks],
            "order": list(ranking.order),
            "pair_eap": pair_eap,
            "progress": self.progress(),
        }

    def _holistic_ranking(self, full: bool = True):
        if self.matrix.n_criteria == 1:
            return expected_ranking(self.matrix, 0, full=full)
        if self.config.get("aggregation", "mcp") == "mcr":
            return mcr_ranking(self.matrix, full=full)
        return mcp_ranking(self.matrix, full=full)

    def submit_moderation(self, payload: ModerationIn) -> dict:
        i, j = (int(payload.pair[0]), int(payload.pair[1]))
        if payload.chosen_winner not in (i, j):
            raise HTTPException(422, f"winner {payload.chosen_winner} is not in pair [{i}, {j}]")
        try:
            self.matrix.pair_index(i, j)
        except KeyError:
            raise HTTPException(422, f"unknown pair [{i}, {j}]") from None
        if not 0 <= payload.criterion < self.matrix.n_criteria:
            raise HTTPException(422, f"unknown criterion {payload.criterion}")
        self._append(
            {
                "type": "moderation",
                "pair": [i, j],
                "criterion": payload.criterion,
                "winner": payload.chosen_winner,
                "pseudo_wins": payload.pseudo_wins,
                "source": "moderator",
                "note": payload.note,
                "timestamp": _now(),
            }
        )
        if self.pending_pair is not None and set(self.pending_pair) == {i, j}:
            self.pending_pair = None
        return {
            "status": self.status,
            "moderated": {"pair": [i, j], "criterion": payload.criterion},
            "queue": moderation_queue(self.matrix, self.config.get("flag_threshold", 50.0)),
        }

    def report(self) -> dict:
        self._refresh_status()
        threshold = self.config.get("flag_threshold", 50.0)
        holistic = self._holistic_ranking()
        per_criterion = {
            str(d): ranking_to_rows(expected_ranking(self.matrix, d))
            for d in range(self.matrix.n_criteria)
        }
        stopping = self.config.get("stopping")
        stop_report = None
        if stopping is not None:
            outcome = stopping_check(
                self.matrix, stopping["metric"], stopping["threshold"], stopping["aggregation"]
            )
            stop_report = {
                "stop": outcome.stop,
                "metric": outcome.metric,
                "threshold": outcome.threshold,
                "aggregation": outcome.aggregation,
                "value": outcome.value,
            }
        return {
            "id": self.id,
            "status": self.status,
            "rankings": {
                "holistic": ranking_to_rows(holistic),
                "per_criterion": per_criterion,
            },
            "reliability": reliability_report(self.matrix, threshold),
            "radar": radar_data(self.matrix),
            "moderation_queue": moderation_queue(self.matrix, threshold),
            "stopping": stop_report,
            "progress": self.progress(),
        }

    def reopen(self) -> dict:
        if self.status == "complete":
            raise HTTPException(409, "budget exhausted; assessment cannot reopen")
        if self.status == "stopped":
            self._append({"type": "status", "status": "active", "timestamp": _now()})
        return {"status": self.status}


# -- application --------------------------------------------------------


class ServiceState:
    def __init__(self, data_dir: Path, snapshot_interval: int):
        self.data_dir = data_dir
        self.snapshot_interval = snapshot_interval
        self.assessments: dict[str, LiveAssessment] = {}
        self.registry_lock = threading.Lock()

    def get(self, assessment_id: str) -> LiveAssessment:
        with self.registry_lock:
            if assessment_id in self.assessments:
                return self.assessments[assessment_id]
            if (self.data_dir / assessment_id / "config.json").exists():
                live = LiveAssessment.load(assessment_id, self.data_dir, self.snapshot_interval)
                self.assessments[assessment_id] = live
                return live
        raise HTTPException(404, f"unknown assessment {assessment_id!r}")


def _require_token(request: Request) -> None:
    token = os.environ.get("BAYESCJ_TOKEN")
    if token and request.headers.get("authorization") != f"Bearer {token}":
        raise HTTPException(401, "missing or invalid bearer token")


def create_app(data_dir: str | Path | None = None, snapshot_interval: int | None = None) -> FastAPI:
    """Build the service; call with an explicit data directory in tests."""
    root = Path(
        data_dir
        if data_dir is not None
        else os.environ.get("BAYESCJ_DATA_DIR", "./bayescj-data")
    )
    root.mkdir(parents=True, exist_ok=True)
    interval = (
        snapshot_interval
        if snapshot_interval is not None
        else int(os.environ.get("BAYESCJ_SNAPSHOT_INTERVAL", DEFAULT_SNAPSHOT_INTERVAL))
    )
    app = FastAPI(title="bayescj session service", dependencies=[Depends(_require_token)])
    state = ServiceState(root, interval)
    app.state.service = state

    @app.post("/assessments", status_code=201)
    def create_assessment(payload: AssessmentIn) -> dict:
        items = [
            Item(idx, entry.label, entry.external_key)
            for idx, entry in enumerate(payload.items)
        ]
        criteria = [
            Criterion(idx, entry.name, entry.weight)
            for idx, entry in enumerate(payload.criteria)
        ]
        try:
            validate_items(items)
            validate_criteria(criteria)
            if payload.strategy not in STRATEGIES:
                raise ValueError(f"unknown strategy {payload.strategy!r}")
            if payload.prior[0] <= 0 or payload.prior[1] <= 0:
                raise ValueError("prior shapes must be positive")
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        config = {
            "items": [entry.model_dump() for entry in payload.items],
            "criteria": [entry.model_dump() for entry in payload.criteria],
            "strategy": payload.strategy,
            "k": payload.k,
            "aggregation": payload.aggregation,
            "stopping": payload.stopping.model_dump() if payload.stopping else None,
            "prior": list(payload.prior),
            "seed": payload.seed,
            "flag_threshold": payload.flag_threshold,
        }
        live = LiveAssessment.create(config, state.data_dir, state.snapshot_interval)
        with state.registry_lock:
            state.assessments[live.id] = live
        return {"id": live.id, "status": live.status, "budget": live.budget}

    @app.get("/assessments/{assessment_id}/next")
    def next_pair(assessment_id: str) -> dict:
        live = state.get(assessment_id)
        with live.lock:
            return live.next_pair()

    @app.post("/assessments/{assessment_id}/judgements")
    def submit_judgements(assessment_id: str, payload: JudgementIn) -> dict:
        live = state.get(assessment_id)
        with live.lock:
            return live.submit_judgements(payload)

    @app.post("/assessments/{assessment_id}/moderations")
    def submit_moderation(assessment_id: str, payload: ModerationIn) -> dict:
        live = state.get(assessment_id)
        with live.lock:
            return live.submit_moderation(payload)

    @app.post("/assessments/{assessment_id}/reopen")
    def reopen(assessment_id: str) -> dict:
        live = state.get(assessment_id)
        with live.lock:
            return live.reopen()

    @app.get("/assessments/{assessment_id}/report")
    def report(assessment_id: str) -> dict:
        live = state.get(assessment_id)
        with live.lock:
            return live.report()

    @app.get("/assessments/{assessment_id}/export")
    def export(assessment_id: str) -> dict:
        live = state.get(assessment_id)
        with live.lock:
            return live.matrix.snapshot(live.id)

    return app
