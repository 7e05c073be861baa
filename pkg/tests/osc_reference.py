"""Independent OSC 1.0 message decoder used as the oracle for the encoder.

Written directly from the OSC 1.0 byte layout (padded C strings, big-endian
numerics); shares no code with zombihub.osc.
"""

import struct


def _read_padded_string(data: bytes, offset: int):
    end = data.index(b"\x00", offset)
    s = data[offset:end].decode("ascii")
    # consume the terminator plus padding to the next 4-byte boundary
    advance = end - offset + 1
    advance += (4 - advance % 4) % 4
    return s, offset + advance


def decode_message(data: bytes):
    """Return (address, [(tag, value), ...]); raises on malformed packets."""
    if len(data) % 4 != 0:
        raise ValueError("packet length not a multiple of 4")
    address, offset = _read_padded_string(data, 0)
    if not address.startswith("/"):
        raise ValueError(f"bad address {address!r}")
    tags, offset = _read_padded_string(data, offset)
    if not tags.startswith(","):
        raise ValueError(f"bad type tag string {tags!r}")
    args = []
    for tag in tags[1:]:
        if tag == "f":
            (v,) = struct.unpack_from(">f", data, offset)
            offset += 4
        elif tag == "i":
            (v,) = struct.unpack_from(">i", data, offset)
            offset += 4
        elif tag == "s":
            v, offset = _read_padded_string(data, offset)
        else:
            raise ValueError(f"unsupported tag {tag!r}")
        args.append((tag, v))
    if offset != len(data):
        raise ValueError("trailing bytes")
    return address, args
