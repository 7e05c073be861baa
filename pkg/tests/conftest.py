import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from zombihub import protocol as pr

SURFACES = ["zombitronica", "zombee_player", "zombee_conductor"]


def random_payload(rng: random.Random) -> pr.Payload:
    roll = rng.randrange(12)
    if roll == 0:
        return pr.Hello(
            roles=frozenset(rng.sample(list(pr.Role), rng.randint(1, 3))),
            caps=pr.CapabilityProfile(
                touch=rng.random() < 0.9, accelerometer=rng.random() < 0.9,
                gyroscope=rng.random() < 0.7, secure_transport=rng.random() < 0.8,
                script_baseline=rng.choice(list(pr.ScriptBaseline))),
            wants_surface=rng.choice(SURFACES + [None]),
            requested_id=rng.choice([None, f"unit-{rng.randrange(100)}"]))
    if roll == 1:
        return pr.Subscribe(topics=tuple(
            pr.Topic(rng.choice(["state/seq", "state/transport", "sensor/motion/*",
                                 "control/zombitronica/*", "*"]))
            for _ in range(rng.randint(1, 4))))
    if roll == 2:
        return pr.Unsubscribe(topics=(pr.Topic("state/seq"),))
    if roll == 3:
        return pr.Touch(surface=rng.choice(SURFACES), control=f"c{rng.randrange(8)}",
                        phase=rng.choice(list(pr.TouchPhase)),
                        x=rng.random(), y=rng.random())
    if roll == 4:
        return pr.Motion(ax=rng.uniform(-50, 50), ay=rng.uniform(-50, 50),
                         az=rng.uniform(-50, 50), rot_alpha=rng.uniform(-360, 360),
                         rot_beta=rng.uniform(-360, 360), rot_gamma=rng.uniform(-360, 360))
    if roll == 5:
        return pr.Orientation(alpha=rng.uniform(0, 359.999),
                              beta=rng.uniform(-180, 180), gamma=rng.uniform(-90, 90))
    if roll == 6:
        return pr.ControlChange(control=f"pot{rng.randrange(4)}", value=rng.random())
    if roll == 7:
        return pr.SeqCellSet(instrument=rng.randrange(8), step=rng.randrange(64),
                             on=rng.random() < 0.5,
                             note=rng.randrange(128) if rng.random() < 0.5 else None)
    if roll == 8:
        return pr.TransportSet(bpm=rng.uniform(1, 500) if rng.random() < 0.7 else None,
                               playing=rng.random() < 0.5)
    if roll == 9:
        return pr.Ping(nonce=rng.randrange(1 << 31))
    if roll == 10:
        return pr.Pong(nonce=rng.randrange(1 << 31), hub_ts_ms=rng.randrange(1 << 40))
    return pr.Error(code=rng.choice(["malformed-frame", "session-full"]),
                    detail="x" * rng.randrange(12))


def random_envelope(rng: random.Random) -> pr.Envelope:
    return pr.make_envelope(
        source=rng.choice(["u0", "u1", "hub", "alice", "z" * 64]),
        seq=rng.randrange(1 << 31), ts_ms=rng.randrange(1 << 41),
        payload=random_payload(rng))


@pytest.fixture
def rng():
    return random.Random(1234)
