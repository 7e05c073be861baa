"""Open Sound Control 1.0 encoding and the topic-to-OSC mapping rules.

Only plain messages are produced (no bundles or timetags): addresses and type
tag strings are null-terminated and zero-padded to 4-byte boundaries, numeric
arguments are big-endian, floats are 32-bit.
"""

from __future__ import annotations

import json
import socket
import struct
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from . import protocol as pr

OscArg = Union[float, int, str]


class OscError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


def _pad_string(s: str) -> bytes:
    raw = s.encode("ascii") + b"\x00"
    return raw + b"\x00" * (-len(raw) % 4)


def encode_osc(address: str, args: List[Tuple[str, OscArg]]) -> bytes:
    """Encode one OSC 1.0 message; args are (typetag, value) with tags f/i/s."""
    if not address.startswith("/") or any(c.isspace() for c in address):
        raise OscError("invalid-address", address)
    try:
        address.encode("ascii")
    except UnicodeEncodeError:
        raise OscError("invalid-address", f"non-ascii in {address!r}")

    tags = ","
    body = b""
    for tag, value in args:
        if tag == "f":
            body += struct.pack(">f", float(value))
        elif tag == "i":
            body += struct.pack(">i", int(value))
        elif tag == "s":
            if not isinstance(value, str):
                raise OscError("unsupported-arg-type", repr(value))
            body += _pad_string(value)
        else:
            raise OscError("unsupported-arg-type", tag)
        tags += tag

    packet = _pad_string(address) + _pad_string(tags) + body
    assert len(packet) % 4 == 0
    return packet


# --- Mapping rules ----------------------------------------------------------

EXTRACTORS = ("value", "x", "y", "ax", "ay", "az", "alpha", "beta", "gamma",
              "rot_alpha", "rot_beta", "rot_gamma", "step", "on", "note",
              "instrument", "bpm", "playing")


@dataclass(frozen=True)
class ArgRule:
    extract: str                  # one of EXTRACTORS, or "const"
    const: Optional[float] = None
    tag: str = "f"
    scale_a: float = 1.0          # emitted value = a * v + b
    scale_b: float = 0.0


@dataclass(frozen=True)
class OscMapping:
    match: pr.Topic               # subscription-style pattern
    address_template: str         # may use {unit} {surface} {control} {axis}
    args: Tuple[ArgRule, ...] = ()

    def __post_init__(self):
        if not self.address_template.startswith("/") or \
                any(c.isspace() for c in self.address_template):
            raise OscError("invalid-address", self.address_template)


def _topic_fields(topic: pr.Topic, env: pr.Envelope) -> Dict[str, str]:
    segs = topic.path.split("/")
    fields = {"unit": env.source, "surface": "", "control": "", "axis": ""}
    if segs[0] == "control" and len(segs) >= 3:
        fields["surface"] = segs[1]
        fields["control"] = segs[2]
        if len(segs) >= 4:
            fields["axis"] = segs[3]
    elif segs[0] == "touch" and len(segs) >= 3:
        fields["surface"] = segs[1]
        fields["control"] = segs[2]
    elif segs[0] == "sensor" and len(segs) >= 3:
        fields["unit"] = segs[2]
    return fields


def _extract(rule: ArgRule, env: pr.Envelope) -> Optional[OscArg]:
    if rule.extract == "const":
        v = rule.const
    else:
        p = env.payload
        v = getattr(p, rule.extract, None)
    if v is None:
        return None
    if isinstance(v, bool):
        v = 1 if v else 0
    if rule.tag in ("f", "i"):
        v = rule.scale_a * float(v) + rule.scale_b
        return int(round(v)) if rule.tag == "i" else v
    return v


def map_message(e: pr.Envelope, rules: List[OscMapping],
                topic: Optional[pr.Topic] = None) -> List[bytes]:
    """Run the envelope through all mapping rules, in order; every matching
    rule emits one packet. Non-data kinds (ping, hello, ...) map to nothing."""
    if topic is None:
        topic = pr.topic_for(e)
    if topic is None:
        return []
    packets = []
    for rule in rules:
        if not rule.match.matches(topic):
            continue
        fields_ = _topic_fields(topic, e)
        try:
            address = rule.address_template.format(**fields_)
        except (KeyError, IndexError):
            continue
        args = []
        usable = True
        for ar in rule.args:
            v = _extract(ar, e)
            if v is None:
                usable = False
                break
            args.append((ar.tag, v))
        if usable:
            packets.append(encode_osc(address, args))
    return packets


def load_mappings(document: str) -> List[OscMapping]:
    """Parse the mapping config: {"mappings": [{match, address, args: [...]}]}.

    An arg is either a string extractor name, {"const": 1.0}, or an object
    {extract, tag, scale: [a, b]}.
    """
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise OscError("malformed-config", str(exc))
    rules = []
    for raw in obj.get("mappings", []):
        args = []
        for a in raw.get("args", []):
            if isinstance(a, str):
                args.append(ArgRule(extract=a))
            elif isinstance(a, dict) and "const" in a:
                args.append(ArgRule(extract="const", const=float(a["const"]),
                                    tag=a.get("tag", "f")))
            elif isinstance(a, dict):
                scale = a.get("scale", [1.0, 0.0])
                args.append(ArgRule(extract=a["extract"], tag=a.get("tag", "f"),
                                    scale_a=float(scale[0]), scale_b=float(scale[1])))
            else:
                raise OscError("malformed-config", f"bad arg {a!r}")
        rules.append(OscMapping(match=pr.Topic(raw["match"]),
                                address_template=raw["address"],
                                args=tuple(args)))
    return rules


# --- UDP sender -------------------------------------------------------------

class OscSender:
    """Fire-and-forget UDP sink; failures are counted, never raised into
    routing. Thread-safe counters so the hub loop and a worker can share it."""

    def __init__(self, host: str, port: int):
        self.dest = (host, port)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._lock = threading.Lock()
        self.sent = 0
        self.failed = 0

    def send(self, packet: bytes) -> bool:
        try:
            self._sock.sendto(packet, self.dest)
        except OSError:
            with self._lock:
                self.failed += 1
            return False
        with self._lock:
            self.sent += 1
        return True

    def close(self) -> None:
        self._sock.close()


class OscBridge:
    """Hub tap: translates every routed message through the mapping rules and
    ships the resulting packets over UDP."""

    def __init__(self, rules: List[OscMapping], sender: OscSender):
        self.rules = rules
        self.sender = sender

    def on_publish(self, topic: pr.Topic, env: pr.Envelope) -> None:
        for packet in map_message(env, self.rules, topic=topic):
            self.sender.send(packet)
