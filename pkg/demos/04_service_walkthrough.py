"""
The judgement service, end to end, without leaving one process
==============================================================

Everything the browser client does — create an assessment, pull served
pairs, submit per-criterion verdicts, watch the stopping rule fire,
moderate a contested pair, reopen — driven against the real HTTP app
through an in-process test client.  At the end we simulate a crash by
building a second app over the same data directory and check that
replaying the event log reproduces the live posterior state bit for
bit.

Requires the dev extras (httpx) for the in-process client.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from bayescj.service import create_app

data_dir = Path(tempfile.mkdtemp(prefix="bayescj-demo-"))
app = create_app(data_dir=data_dir)
client = TestClient(app)

# One assessment: four poems, two criteria, an agreement-based stopping
# rule so the session can end before the budget runs out.
created = client.post(
    "/assessments",
    json={
        "items": [{"label": f"poem {c}", "payload": f"<em>poem {c}</em>"}
                  for c in "ABCD"],
        "criteria": [{"name": "imagery", "weight": 0.5},
                     {"name": "voice", "weight": 0.5}],
        "strategy": "entropy",
        "k": 25,
        "seed": 4,
        "stopping": {"metric": "eap", "threshold": 70.0, "aggregation": "min"},
    },
).json()
aid = created["id"]
print(f"assessment {aid}: status={created['status']}, "
      f"budget={created['budget']} iterations")

# The judging loop a human would drive: fetch the served pair, pick a
# winner per criterion, submit.  Our stand-in judge always prefers the
# earlier poem, so agreement accumulates fast and the stop rule fires.
screens = 0
while True:
    nxt = client.get(f"/assessments/{aid}/next").json()
    if nxt["status"] != "active":
        print(f"\nstopped after {screens} screens: {nxt['reason']}")
        break
    pair = [nxt["pair"]["i"], nxt["pair"]["j"]]
    winners = {str(c["id"]): min(pair) for c in nxt["criteria"]}
    resp = client.post(
        f"/assessments/{aid}/judgements",
        json={"pair": pair, "winners": winners},
    ).json()
    screens += 1
    if screens % 10 == 0:
        done = resp["progress"]["judgements"]
        total = resp["progress"]["judgement_budget"]
        print(f"  screen {screens:>3}: order so far {resp['order']} "
              f"({done}/{total} judgements)")

# The report bundles everything a moderator dashboard needs.
report = client.get(f"/assessments/{aid}/report").json()
print("\nreport status:", report["status"])
print("holistic order:",
      [row["item_id"] for row in report["rankings"]["holistic"]])
print("flagged pairs:", len(report["moderation_queue"]))

# A stopped assessment can be reopened for more judging; it stays open
# until fresh evidence says otherwise.
reopened = client.post(f"/assessments/{aid}/reopen").json()
print("\nafter reopen:", reopened["status"])

# A second, contrarian judge now works the queue and keeps reversing
# the earlier verdicts, dragging some pairs back into contention.
for _ in range(8):
    nxt = client.get(f"/assessments/{aid}/next").json()
    if nxt["status"] != "active":
        break
    pair = [nxt["pair"]["i"], nxt["pair"]["j"]]
    winners = {str(c["id"]): max(pair) for c in nxt["criteria"]}
    client.post(f"/assessments/{aid}/judgements",
                json={"pair": pair, "winners": winners})

report = client.get(f"/assessments/{aid}/report").json()
queue = report["moderation_queue"]
print(f"after 8 contrarian screens: {len(queue)} flagged pairs")
for row in queue[:3]:
    print(f"  pair ({row['i']}, {row['j']}) criterion {row['d']}: "
          f"EAP {row['eap']:.1f}% after {row['n']} judgements")

# The principal moderator settles the most contested pair; a bulk
# pseudo-count win retires it from the queue on the spot.
if queue:
    head = queue[0]
    verdict = client.post(
        f"/assessments/{aid}/moderations",
        json={"pair": [head["i"], head["j"]], "criterion": head["d"],
              "chosen_winner": head["i"]},
    ).json()
    print(f"moderated pair ({head['i']}, {head['j']}) on criterion "
          f"{head['d']}; queue now {len(verdict['queue'])} deep")

# Crash-and-recover: a second app over the same directory knows nothing
# of the first; it replays log.jsonl and must land on the same state.
live = app.state.service.get(aid)
replica_app = create_app(data_dir=data_dir)
with TestClient(replica_app) as replica:
    recovered = replica.app.state.service.get(aid)
    identical = recovered.matrix.same_state(live.matrix)
    print(f"\nreplayed {recovered.events} events from the log; "
          f"posterior state identical: {identical}")
print(f"(event log at {data_dir / aid / 'log.jsonl'})")
