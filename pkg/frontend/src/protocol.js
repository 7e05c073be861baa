"use strict";
/**
 * Wire codec for the hub protocol, browser side.
 *
 * Frames are single JSON objects with exactly the keys v/kind/src/seq/ts/pl,
 * encoded with sorted keys and no whitespace so a decode/re-encode round trip
 * is byte-stable (the hub encodes the same way).
 */
var Zombitron;
(function (Zombitron) {
    var Protocol;
    (function (Protocol) {
        Protocol.VERSION = 1;
        Protocol.MAX_FRAME_BYTES = 64 * 1024;
        Protocol.KINDS = [
            "hello", "welcome", "subscribe", "unsubscribe", "touch", "motion",
            "orientation", "control_change", "seq_cell_set", "transport_set",
            "step_tick", "ping", "pong", "error",
        ];
        function protocolError(detail) {
            var err = new Error(detail);
            err.name = "ProtocolError";
            return err;
        }
        Protocol.protocolError = protocolError;
        function isKnownKind(kind) {
            for (var i = 0; i < Protocol.KINDS.length; i++) {
                if (Protocol.KINDS[i] === kind) {
                    return true;
                }
            }
            return false;
        }
        function validUnitId(id) {
            if (typeof id !== "string" || id.length < 1 || id.length > 64) {
                return false;
            }
            for (var i = 0; i < id.length; i++) {
                var c = id.charCodeAt(i);
                if (c <= 0x20 || c > 0x7e) {
                    return false;
                }
            }
            return true;
        }
        Protocol.validUnitId = validUnitId;
        /** JSON.stringify with object keys sorted, matching the hub's canonical form. */
        function stableStringify(value) {
            if (value === null || typeof value !== "object") {
                return JSON.stringify(value);
            }
            if (Object.prototype.toString.call(value) === "[object Array]") {
                var items = [];
                for (var i = 0; i < value.length; i++) {
                    items.push(stableStringify(value[i]));
                }
                return "[" + items.join(",") + "]";
            }
            var keys = [];
            for (var k in value) {
                if (Object.prototype.hasOwnProperty.call(value, k)) {
                    keys.push(k);
                }
            }
            keys.sort();
            var parts = [];
            for (var j = 0; j < keys.length; j++) {
                parts.push(JSON.stringify(keys[j]) + ":" + stableStringify(value[keys[j]]));
            }
            return "{" + parts.join(",") + "}";
        }
        Protocol.stableStringify = stableStringify;
        function encodeEnvelope(env) {
            var frame = stableStringify({
                v: env.v, kind: env.kind, src: env.src, seq: env.seq,
                ts: env.ts, pl: env.pl,
            });
            if (frame.length > Protocol.MAX_FRAME_BYTES) {
                throw protocolError("frame exceeds 64 KiB");
            }
            return frame;
        }
        Protocol.encodeEnvelope = encodeEnvelope;
        function makeEnvelope(kind, src, seq, ts, pl) {
            return { v: Protocol.VERSION, kind: kind, src: src, seq: seq, ts: ts, pl: pl };
        }
        Protocol.makeEnvelope = makeEnvelope;
        function decodeEnvelope(frame) {
            if (typeof frame !== "string" || frame.length > Protocol.MAX_FRAME_BYTES) {
                throw protocolError("frame missing or oversized");
            }
            var obj;
            try {
                obj = JSON.parse(frame);
            }
            catch (e) {
                throw protocolError("frame is not valid JSON");
            }
            if (obj === null || typeof obj !== "object" ||
                Object.prototype.toString.call(obj) === "[object Array]") {
                throw protocolError("frame must be a JSON object");
            }
            var expected = {
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
            if (obj.v !== Protocol.VERSION) {
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
        Protocol.decodeEnvelope = decodeEnvelope;
        function clamp01(x) {
            if (!(x > 0)) {
                return 0;
            } // also catches NaN
            if (x > 1) {
                return 1;
            }
            return x;
        }
        Protocol.clamp01 = clamp01;
        function clamp(x, lo, hi) {
            if (!(x > lo)) {
                return lo;
            }
            if (x > hi) {
                return hi;
            }
            return x;
        }
        Protocol.clamp = clamp;
        /** Normalize a compass angle into [0, 360). */
        function wrapAlpha(alpha) {
            if (typeof alpha !== "number" || !isFinite(alpha)) {
                return 0;
            }
            var a = alpha % 360;
            if (a < 0) {
                a += 360;
            }
            // the modulo can land exactly on 360 through float error
            return a >= 360 ? 0 : a;
        }
        Protocol.wrapAlpha = wrapAlpha;
    })(Protocol = Zombitron.Protocol || (Zombitron.Protocol = {}));
})(Zombitron || (Zombitron = {}));
