/**
 * Wire codec for the hub protocol, browser side.
 *
 * Frames are single JSON objects with exactly the keys v/kind/src/seq/ts/pl,
 * encoded with sorted keys and no whitespace so a decode/re-encode round trip
 * is byte-stable (the hub encodes the same way).
 */
namespace Zombitron.Protocol {
  export var VERSION = 1;
  export var MAX_FRAME_BYTES = 64 * 1024;

  export var KINDS = [
    "hello", "welcome", "subscribe", "unsubscribe", "touch", "motion",
    "orientation", "control_change", "seq_cell_set", "transport_set",
    "step_tick", "ping", "pong", "error",
  ];

  export interface Envelope {
    v: number;
    kind: string;
    src: string;
    seq: number;
    ts: number;
    pl: any;
  }

  export function protocolError(detail: string): Error {
    var err = new Error(detail);
    err.name = "ProtocolError";
    return err;
  }

  function isKnownKind(kind: string): boolean {
    for (var i = 0; i < KINDS.length; i++) {
      if (KINDS[i] === kind) { return true; }
    }
    return false;
  }

  export function validUnitId(id: string): boolean {
    if (typeof id !== "string" || id.length < 1 || id.length > 64) {
      return false;
    }
    for (var i = 0; i < id.length; i++) {
      var c = id.charCodeAt(i);
      if (c <= 0x20 || c > 0x7e) { return false; }
    }
    return true;
  }

  /** JSON.stringify with object keys sorted, matching the hub's canonical form. */
  export function stableStringify(value: any): string {
    if (value === null || typeof value !== "object") {
      return JSON.stringify(value);
    }
    if (Object.prototype.toString.call(value) === "[object Array]") {
      var items: string[] = [];
      for (var i = 0; i < value.length; i++) {
        items.push(stableStringify(value[i]));
      }
      return "[" + items.join(",") + "]";
    }
    var keys: string[] = [];
    for (var k in value) {
      if (Object.prototype.hasOwnProperty.call(value, k)) { keys.push(k); }
    }
    keys.sort();
    var parts: string[] = [];
    for (var j = 0; j < keys.length; j++) {
      parts.push(JSON.stringify(keys[j]) + ":" + stableStringify(value[keys[j]]));
    }
    return "{" + parts.join(",") + "}";
  }

  export function encodeEnvelope(env: Envelope): string {
    var frame = stableStringify({
      v: env.v, kind: env.kind, src: env.src, seq: env.seq,
      ts: env.ts, pl: env.pl,
    });
    if (frame.length > MAX_FRAME_BYTES) {
      throw protocolError("frame exceeds 64 KiB");
    }
    return frame;
  }

  export function makeEnvelope(kind: string, src: string, seq: number,
                               ts: number, pl: any): Envelope {
    return { v: VERSION, kind: kind, src: src, seq: seq, ts: ts, pl: pl };
  }

  export function decodeEnvelope(frame: string): Envelope {
    if (typeof frame !== "string" || frame.length > MAX_FRAME_BYTES) {
      throw protocolError("frame missing or oversized");
    }
    var obj: any;
    try {
      obj = JSON.parse(frame);
    } catch (e) {
      throw protocolError("frame is not valid JSON");
    }
    if (obj === null || typeof obj !== "object" ||
        Object.prototype.toString.call(obj) === "[object Array]") {
      throw protocolError("frame must be a JSON object");
    }
    var expected: { [key: string]: boolean } = {
      v: true, kind: true, src: true, seq: true, ts: true, pl: true,
    };
    for (var key in obj) {
      if (Object.prototype.hasOwnProperty.call(obj, key) && !expected[key]) {
        throw protocolError("unknown key: " + key);
      }
    }
    for (var want in expected) {
      if (!(want in obj)) {
        throw protocolError("missing key: " + want);
      }
    }
    if (obj.v !== VERSION) {
      throw protocolError("unsupported version " + obj.v);
    }
    if (typeof obj.kind !== "string" || !isKnownKind(obj.kind)) {
      throw protocolError("unknown kind " + obj.kind);
    }
    if (!validUnitId(obj.src)) {
      throw protocolError("bad source id");
    }
    if (typeof obj.seq !== "number" || obj.seq < 0 ||
        obj.seq !== Math.floor(obj.seq)) {
      throw protocolError("bad seq");
    }
    if (typeof obj.ts !== "number") {
      throw protocolError("bad ts");
    }
    if (obj.pl === null || typeof obj.pl !== "object") {
      throw protocolError("pl must be an object");
    }
    return obj;
  }

  export function clamp01(x: number): number {
    if (!(x > 0)) { return 0; }    // also catches NaN
    if (x > 1) { return 1; }
    return x;
  }

  export function clamp(x: number, lo: number, hi: number): number {
    if (!(x > lo)) { return lo; }
    if (x > hi) { return hi; }
    return x;
  }

  /** Normalize a compass angle into [0, 360). */
  export function wrapAlpha(alpha: number): number {
    if (typeof alpha !== "number" || !isFinite(alpha)) { return 0; }
    var a = alpha % 360;
    if (a < 0) { a += 360; }
    // the modulo can land exactly on 360 through float error
    return a >= 360 ? 0 : a;
  }
}
