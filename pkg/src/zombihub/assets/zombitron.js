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
/**
 * Local mirror of the hub's shared state.
 *
 * The mirror is seeded from the Welcome snapshot and folded forward from the
 * mutation frames the hub fans out; after any quiet moment it must equal the
 * hub's snapshot field for field.
 */
/// <reference path="protocol.ts" />
var Zombitron;
(function (Zombitron) {
    var State;
    (function (State) {
        State.BPM_MIN = 20;
        State.BPM_MAX = 300;
        function load(snapshotText) {
            var obj;
            try {
                obj = JSON.parse(snapshotText);
            }
            catch (e) {
                throw Zombitron.Protocol.protocolError("malformed snapshot");
            }
            if (!obj || !obj.grid || !obj.transport || !obj.controls ||
                typeof obj.revision !== "number") {
                throw Zombitron.Protocol.protocolError("malformed snapshot");
            }
            var grid = [];
            for (var i = 0; i < obj.grid.length; i++) {
                var row = [];
                for (var j = 0; j < obj.grid[i].length; j++) {
                    row.push({ on: !!obj.grid[i][j].on, note: obj.grid[i][j].note });
                }
                grid.push(row);
            }
            var controls = {};
            for (var id in obj.controls) {
                if (Object.prototype.hasOwnProperty.call(obj.controls, id)) {
                    controls[id] = obj.controls[id];
                }
            }
            return {
                grid: grid,
                transport: {
                    bpm: obj.transport.bpm,
                    playing: !!obj.transport.playing,
                    step: obj.transport.step,
                },
                controls: controls,
                revision: obj.revision,
            };
        }
        State.load = load;
        /**
         * Fold one hub-routed mutation frame into the mirror (in place).
         * Returns false for kinds that don't touch state.
         */
        function apply(m, kind, pl) {
            if (kind === "control_change") {
                if (!Object.prototype.hasOwnProperty.call(m.controls, pl.control)) {
                    // unknown to this mirror: hub validated it, so track it anyway
                    m.controls[pl.control] = 0;
                }
                m.controls[pl.control] = pl.value;
            }
            else if (kind === "seq_cell_set") {
                if (pl.instrument >= 0 && pl.instrument < m.grid.length &&
                    pl.step >= 0 && pl.step < m.grid[pl.instrument].length) {
                    m.grid[pl.instrument][pl.step] = {
                        on: !!pl.on,
                        note: pl.note === undefined ? null : pl.note,
                    };
                }
            }
            else if (kind === "transport_set") {
                if (pl.bpm !== null && pl.bpm !== undefined) {
                    m.transport.bpm = Zombitron.Protocol.clamp(pl.bpm, State.BPM_MIN, State.BPM_MAX);
                }
                if (pl.playing !== null && pl.playing !== undefined) {
                    m.transport.playing = pl.playing;
                }
            }
            else if (kind === "step_tick") {
                m.transport.step = pl.step;
            }
            else {
                return false;
            }
            m.revision += 1;
            return true;
        }
        State.apply = apply;
    })(State = Zombitron.State || (Zombitron.State = {}));
})(Zombitron || (Zombitron = {}));
/**
 * Websocket session with reconnect.
 *
 * Lifecycle: connecting -> live (after Welcome) -> reconnecting on drop, with
 * exponential backoff 0.5 s doubling to an 8 s cap, resetting once a Welcome
 * arrives. The same requested id is offered on every attempt. Control edits
 * sent while dead are queued and flushed on the next live session; sensor
 * frames are dropped instead (stale readings are worthless).
 */
/// <reference path="protocol.ts" />
var Zombitron;
(function (Zombitron) {
    var Net;
    (function (Net) {
        Net.BACKOFF_BASE_MS = 500;
        Net.BACKOFF_CAP_MS = 8000;
        function backoffMs(attempt) {
            var ms = Net.BACKOFF_BASE_MS;
            for (var i = 0; i < attempt; i++) {
                ms *= 2;
                if (ms >= Net.BACKOFF_CAP_MS) {
                    return Net.BACKOFF_CAP_MS;
                }
            }
            return ms;
        }
        Net.backoffMs = backoffMs;
        var SENSOR_KINDS = {
            touch: true, motion: true, orientation: true,
        };
        var Connection = /** @class */ (function () {
            function Connection(opts) {
                this.state = "connecting";
                this.ws = null;
                this.seq = 0;
                this.attempt = 0;
                this.queue = [];
                this.stopped = false;
                this.opts = opts;
                this.unit = opts.requestedId;
            }
            Connection.prototype.start = function () {
                this.open();
            };
            Connection.prototype.stop = function () {
                this.stopped = true;
                if (this.ws) {
                    try {
                        this.ws.close();
                    }
                    catch (e) { /* already dead */ }
                }
            };
            /** Send one payload. Returns true if it went (or was queued). */
            Connection.prototype.send = function (kind, pl) {
                if (this.state === "live" && this.ws && this.ws.readyState === 1) {
                    this.push(kind, pl);
                    return true;
                }
                if (!SENSOR_KINDS[kind]) {
                    this.queue.push({ kind: kind, pl: pl });
                    return true;
                }
                return false;
            };
            Connection.prototype.push = function (kind, pl) {
                var env = Zombitron.Protocol.makeEnvelope(kind, this.unit, this.seq, new Date().getTime(), pl);
                this.seq += 1;
                this.ws.send(Zombitron.Protocol.encodeEnvelope(env));
            };
            Connection.prototype.setState = function (state) {
                this.state = state;
                if (this.opts.onStateChange) {
                    this.opts.onStateChange(state);
                }
            };
            Connection.prototype.open = function () {
                if (this.stopped) {
                    return;
                }
                var WS = this.opts.webSocketImpl ||
                    (typeof WebSocket !== "undefined" ? WebSocket : null);
                if (!WS) {
                    throw Zombitron.Protocol.protocolError("no websocket available");
                }
                var self = this;
                this.seq = 0; // fresh session, fresh sequence space
                this.setState(this.attempt === 0 ? "connecting" : "reconnecting");
                var ws = new WS(this.opts.url);
                this.ws = ws;
                ws.onopen = function () {
                    // hello then subscriptions back to back, so nothing can be routed
                    // between the snapshot and our subscription
                    self.push("hello", {
                        roles: ["client"],
                        caps: self.opts.caps,
                        wants_surface: self.opts.surface,
                        requested_id: self.opts.requestedId,
                    });
                    if (self.opts.topics.length) {
                        self.push("subscribe", { topics: self.opts.topics });
                    }
                };
                ws.onmessage = function (ev) {
                    var data = ev.data;
                    if (data && typeof data !== "string" && typeof data.toString === "function") {
                        data = data.toString(); // some stacks hand text frames over as buffers
                    }
                    var env;
                    try {
                        env = Zombitron.Protocol.decodeEnvelope(data);
                    }
                    catch (e) {
                        return; // junk frame; the hub is authoritative, just skip it
                    }
                    self.handle(env);
                };
                ws.onclose = function () { self.dropped(); };
                ws.onerror = function () { };
            };
            Connection.prototype.handle = function (env) {
                if (env.kind === "welcome") {
                    this.unit = env.pl.unit;
                    this.attempt = 0;
                    this.setState("live");
                    if (this.opts.onWelcome) {
                        this.opts.onWelcome(env.pl);
                    }
                    this.flush();
                    return;
                }
                if (env.kind === "ping") {
                    if (this.ws && this.ws.readyState === 1) {
                        this.push("pong", { nonce: env.pl.nonce, hub_ts_ms: env.ts });
                    }
                    return;
                }
                if (this.opts.onFrame) {
                    this.opts.onFrame(env);
                }
            };
            Connection.prototype.flush = function () {
                var pending = this.queue;
                this.queue = [];
                for (var i = 0; i < pending.length; i++) {
                    this.push(pending[i].kind, pending[i].pl);
                }
            };
            Connection.prototype.dropped = function () {
                if (this.stopped) {
                    return;
                }
                if (this.ws) {
                    this.ws.onopen = this.ws.onmessage = this.ws.onclose = null;
                    this.ws = null;
                }
                var delay = backoffMs(this.attempt);
                this.attempt += 1;
                this.setState("reconnecting");
                var self = this;
                var later = this.opts.setTimeoutImpl || function (fn, ms) {
                    return setTimeout(fn, ms);
                };
                later(function () { self.open(); }, delay);
            };
            return Connection;
        }());
        Net.Connection = Connection;
    })(Net = Zombitron.Net || (Zombitron.Net = {}));
})(Zombitron || (Zombitron = {}));
/**
 * Motion/orientation capture with the permission dance.
 *
 * Newer iOS builds gate DeviceMotion/DeviceOrientation behind a
 * requestPermission() call that must run inside a user gesture; older
 * platforms (the fleet this targets) fire the events unconditionally. Note
 * the entry point is DeviceMotionEvent.requestPermission /
 * DeviceOrientationEvent.requestPermission — some writeups call it
 * "requestDevicePermission", which matches no shipping API.
 */
/// <reference path="protocol.ts" />
var Zombitron;
(function (Zombitron) {
    var Sensors;
    (function (Sensors) {
        Sensors.DEFAULT_THROTTLE_HZ = 30;
        function clampThrottle(hz) {
            return Zombitron.Protocol.clamp(hz || Sensors.DEFAULT_THROTTLE_HZ, 1, 120);
        }
        Sensors.clampThrottle = clampThrottle;
        function permissionRequired(win) {
            var DME = win.DeviceMotionEvent;
            var DOE = win.DeviceOrientationEvent;
            return !!((DME && typeof DME.requestPermission === "function") ||
                (DOE && typeof DOE.requestPermission === "function"));
        }
        Sensors.permissionRequired = permissionRequired;
        /**
         * Resolve the permission state; cb gets "granted", "denied" or
         * "not-required". Must be called from a user gesture where required.
         */
        function requestPermission(win, cb) {
            if (!permissionRequired(win)) {
                cb("not-required");
                return;
            }
            var entry = (win.DeviceMotionEvent &&
                win.DeviceMotionEvent.requestPermission) ||
                win.DeviceOrientationEvent.requestPermission;
            try {
                entry.call(null).then(function (result) { cb(result === "granted" ? "granted" : "denied"); }, function () { cb("denied"); });
            }
            catch (e) {
                cb("denied");
            }
        }
        Sensors.requestPermission = requestPermission;
        /**
         * Attach throttled listeners; every reading that survives the throttle is
         * normalized into protocol ranges and handed to emit. Returns a detach
         * function.
         */
        function attach(win, throttleHz, emit) {
            var minGapMs = 1000 / clampThrottle(throttleHz);
            var lastMotion = 0;
            var lastOrientation = 0;
            function onMotion(ev) {
                var now = new Date().getTime();
                if (now - lastMotion < minGapMs) {
                    return;
                }
                lastMotion = now;
                var acc = ev.accelerationIncludingGravity || ev.acceleration || {};
                var rot = ev.rotationRate || {};
                emit({
                    kind: "motion",
                    pl: {
                        ax: num(acc.x), ay: num(acc.y), az: num(acc.z),
                        ra: num(rot.alpha), rb: num(rot.beta), rg: num(rot.gamma),
                    },
                });
            }
            function onOrientation(ev) {
                var now = new Date().getTime();
                if (now - lastOrientation < minGapMs) {
                    return;
                }
                lastOrientation = now;
                emit({
                    kind: "orientation",
                    pl: {
                        alpha: Zombitron.Protocol.wrapAlpha(ev.alpha),
                        beta: Zombitron.Protocol.clamp(num(ev.beta), -180, 180),
                        gamma: Zombitron.Protocol.clamp(num(ev.gamma), -90, 90),
                    },
                });
            }
            win.addEventListener("devicemotion", onMotion);
            win.addEventListener("deviceorientation", onOrientation);
            return function () {
                win.removeEventListener("devicemotion", onMotion);
                win.removeEventListener("deviceorientation", onOrientation);
            };
        }
        Sensors.attach = attach;
        function num(x) {
            return typeof x === "number" && isFinite(x) ? x : 0;
        }
    })(Sensors = Zombitron.Sensors || (Zombitron.Sensors = {}));
})(Zombitron || (Zombitron = {}));
/**
 * DOM renderer for surface specs.
 *
 * Everything is plain absolutely-positioned/percentage-sized divs with big
 * hit targets — it has to survive cracked 320px screens and browsers that
 * never heard of CSS grid. Values always leave here normalized to [0,1] in
 * control-local space.
 */
/// <reference path="protocol.ts" />
var Zombitron;
(function (Zombitron) {
    var Surface;
    (function (Surface) {
        function el(doc, cls) {
            var node = doc.createElement("div");
            node.className = cls;
            return node;
        }
        /** Pointer position -> [0,1] x/y inside the element, touch or mouse. */
        function pointerFraction(target, ev) {
            var point = ev.touches && ev.touches.length ? ev.touches[0] : ev;
            var rect = target.getBoundingClientRect();
            var w = rect.width || 1;
            var h = rect.height || 1;
            return {
                x: Zombitron.Protocol.clamp01((point.clientX - rect.left) / w),
                y: Zombitron.Protocol.clamp01((point.clientY - rect.top) / h),
            };
        }
        Surface.pointerFraction = pointerFraction;
        function onPress(node, fn, alsoMove) {
            var dragging = false;
            function down(ev) {
                dragging = true;
                fn(ev);
                if (ev.preventDefault) {
                    ev.preventDefault();
                }
            }
            function move(ev) {
                if (dragging && alsoMove) {
                    fn(ev);
                }
            }
            function up() { dragging = false; }
            node.addEventListener("touchstart", down);
            node.addEventListener("touchmove", move);
            node.addEventListener("touchend", up);
            node.addEventListener("mousedown", down);
            node.addEventListener("mousemove", move);
            node.addEventListener("mouseup", up);
            node.addEventListener("mouseleave", up);
        }
        function render(root, spec, caps, handlers) {
            var doc = root.ownerDocument || document;
            root.innerHTML = "";
            var cells = {};
            var fills = {};
            var playheadCols = [];
            var errorPanel = null;
            for (var c = 0; c < spec.controls.length; c++) {
                var control = spec.controls[c];
                var block = el(doc, "z-control z-" + control.kind);
                block.setAttribute("data-control", control.id);
                block.setAttribute("data-kind", control.kind);
                if (control.kind === "step_sequencer") {
                    buildSequencer(doc, block, control, cells, playheadCols, handlers);
                }
                else if (control.kind === "slider") {
                    buildLinear(doc, block, control, fills, handlers, true);
                }
                else if (control.kind === "pot") {
                    buildLinear(doc, block, control, fills, handlers, false);
                }
                else if (control.kind === "xy") {
                    buildXy(doc, block, control, handlers);
                }
                else if (control.kind === "pad_grid") {
                    buildPads(doc, block, control, handlers);
                }
                else if (control.kind === "tilt") {
                    buildTilt(doc, block, control, caps);
                }
                else {
                    // unknown control kind: visible panel, session stays live
                    block.className = "z-control z-error";
                    block.appendChild(doc.createTextNode("unsupported control: " + control.kind));
                }
                root.appendChild(block);
            }
            return {
                root: root,
                setCell: function (instrument, step, on) {
                    var node = cells[instrument + "_" + step];
                    if (node) {
                        node.className = on ? "z-cell z-on" : "z-cell";
                    }
                },
                setPlayhead: function (step) {
                    for (var g = 0; g < playheadCols.length; g++) {
                        var cols = playheadCols[g];
                        for (var s = 0; s < cols.length; s++) {
                            var suffix = s === step ? " z-now" : "";
                            var col = cols[s];
                            col.className = col.className.replace(/ z-now/g, "") + suffix;
                        }
                    }
                },
                setControl: function (id, value) {
                    var fill = fills[id];
                    if (fill) {
                        fill.style.height = Math.round(value * 100) + "%";
                    }
                },
                showError: function (message) {
                    if (!errorPanel) {
                        errorPanel = el(doc, "z-error-panel");
                        root.appendChild(errorPanel);
                    }
                    errorPanel.innerHTML = "";
                    errorPanel.appendChild(doc.createTextNode(message));
                },
            };
        }
        Surface.render = render;
        function buildSequencer(doc, block, control, cells, playheadCols, handlers) {
            var instruments = control.instruments || 1;
            var steps = control.steps || 8;
            var cols = [];
            for (var i = 0; i < instruments; i++) {
                var row = el(doc, "z-seq-row");
                for (var s = 0; s < steps; s++) {
                    var cell = el(doc, "z-cell");
                    cell.setAttribute("data-inst", String(i));
                    cell.setAttribute("data-step", String(s));
                    cell.style.width = (100 / steps) + "%";
                    (function (inst, st) {
                        onPress(cell, function () { handlers.cellToggle(inst, st); }, false);
                    })(i, s);
                    cells[i + "_" + s] = cell;
                    row.appendChild(cell);
                    if (i === 0) {
                        cols.push(cell);
                    }
                }
                block.appendChild(row);
            }
            // playhead marks the whole column via the top row's cells
            var columnMarks = [];
            for (var s2 = 0; s2 < steps; s2++) {
                columnMarks.push(cols[s2]);
            }
            playheadCols.push(columnMarks);
        }
        function buildLinear(doc, block, control, fills, handlers, vertical) {
            var fill = el(doc, "z-fill");
            block.appendChild(fill);
            var label = el(doc, "z-label");
            label.appendChild(doc.createTextNode(control.label || control.id));
            block.appendChild(label);
            fills[control.id] = fill;
            onPress(block, function (ev) {
                var frac = pointerFraction(block, ev);
                // up = more, for both sliders and pots
                var value = 1 - frac.y;
                fill.style.height = Math.round(value * 100) + "%";
                handlers.controlChange(control.id, value);
            }, true);
        }
        function buildXy(doc, block, control, handlers) {
            var dot = el(doc, "z-dot");
            block.appendChild(dot);
            onPress(block, function (ev) {
                var frac = pointerFraction(block, ev);
                dot.style.left = Math.round(frac.x * 100) + "%";
                dot.style.top = Math.round(frac.y * 100) + "%";
                handlers.controlChange(control.id + "/x", frac.x);
                handlers.controlChange(control.id + "/y", 1 - frac.y);
            }, true);
        }
        function buildPads(doc, block, control, handlers) {
            var rows = control.rows || 1;
            var colsN = control.cols || 1;
            for (var r = 0; r < rows; r++) {
                var rowEl = el(doc, "z-pad-row");
                for (var col = 0; col < colsN; col++) {
                    var pad = el(doc, "z-pad");
                    pad.style.width = (100 / colsN) + "%";
                    (function (id, node) {
                        node.addEventListener("touchstart", function (ev) {
                            handlers.controlChange(id, 1);
                            if (ev.preventDefault) {
                                ev.preventDefault();
                            }
                        });
                        node.addEventListener("touchend", function () {
                            handlers.controlChange(id, 0);
                        });
                        node.addEventListener("mousedown", function () {
                            handlers.controlChange(id, 1);
                        });
                        node.addEventListener("mouseup", function () {
                            handlers.controlChange(id, 0);
                        });
                    })(control.id + "/" + r + "_" + col, pad);
                    rowEl.appendChild(pad);
                }
                block.appendChild(rowEl);
            }
        }
        function buildTilt(doc, block, control, caps) {
            var label = el(doc, "z-label");
            var text = control.label || control.id;
            if (!caps || !caps.gyroscope) {
                block.className += " z-disabled";
                text += " (needs gyroscope)";
            }
            else {
                text += " (tilt)";
            }
            label.appendChild(doc.createTextNode(text));
            block.appendChild(label);
        }
    })(Surface = Zombitron.Surface || (Zombitron.Surface = {}));
})(Zombitron || (Zombitron = {}));
/**
 * Entry point: fetch the surface, open the session, glue input to the wire.
 *
 * Zombitron.boot(surfaceEl, statusEl) is what the served index.html calls.
 */
/// <reference path="protocol.ts" />
/// <reference path="state.ts" />
/// <reference path="net.ts" />
/// <reference path="sensors.ts" />
/// <reference path="surface.ts" />
var Zombitron;
(function (Zombitron) {
    var STYLE = "" +
        ".z-control{position:relative;float:left;box-sizing:border-box;" +
        "margin:1%;background:#1d1d1d;border:1px solid #333;border-radius:4px;" +
        "overflow:hidden;}" +
        ".z-step_sequencer{width:98%;height:40%;}" +
        ".z-slider{width:14%;height:34%;}" +
        ".z-pot{width:14%;height:22%;}" +
        ".z-xy{width:38%;height:34%;background:#16211c;}" +
        ".z-pad_grid{width:98%;height:30%;}" +
        ".z-seq-row{height:25%;}" +
        ".z-cell{float:left;height:96%;margin:0 0 0 0;background:#262626;" +
        "border:1px solid #111;box-sizing:border-box;}" +
        ".z-cell.z-on{background:#3ec970;}" +
        ".z-cell.z-now{border-color:#e9d26a;}" +
        ".z-fill{position:absolute;bottom:0;left:0;right:0;height:0;" +
        "background:#4a8fd4;}" +
        ".z-label{position:absolute;top:4px;left:6px;font-size:11px;color:#aaa;" +
        "pointer-events:none;}" +
        ".z-dot{position:absolute;width:18px;height:18px;margin:-9px;" +
        "border-radius:9px;background:#d44a7a;left:50%;top:50%;}" +
        ".z-pad-row{height:48%;}" +
        ".z-pad{float:left;height:96%;background:#2a2438;border:1px solid #111;" +
        "box-sizing:border-box;}" +
        ".z-disabled{opacity:0.35;}" +
        ".z-error,.z-error-panel{color:#e07a7a;padding:8px;font-size:12px;}" +
        ".z-perm{position:fixed;bottom:12px;right:12px;z-index:20;" +
        "padding:10px 16px;background:#4a8fd4;color:#fff;border:0;" +
        "border-radius:4px;font-size:14px;}";
    function httpGetJson(url, cb) {
        var xhr = new XMLHttpRequest();
        xhr.open("GET", url, true);
        xhr.onreadystatechange = function () {
            if (xhr.readyState !== 4) {
                return;
            }
            if (xhr.status !== 200) {
                cb(new Error("GET " + url + " -> " + xhr.status));
                return;
            }
            try {
                cb(null, JSON.parse(xhr.responseText));
            }
            catch (e) {
                cb(e);
            }
        };
        xhr.send(null);
    }
    function detectCaps(win) {
        return {
            touch: true,
            accelerometer: !!win.DeviceMotionEvent,
            gyroscope: !!win.DeviceOrientationEvent,
            secure_transport: win.location.protocol === "https:",
            script_baseline: "es5",
        };
    }
    function pickSurfaceName(win, available) {
        var q = /[?&]surface=([^&]+)/.exec(win.location.search || "");
        if (q) {
            var wanted = decodeURIComponent(q[1]);
            for (var i = 0; i < available.length; i++) {
                if (available[i] === wanted) {
                    return wanted;
                }
            }
        }
        for (var j = 0; j < available.length; j++) {
            if (available[j] === "zombitronica") {
                return available[j];
            }
        }
        return available[0];
    }
    function randomId() {
        var alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
        var id = "z";
        for (var i = 0; i < 7; i++) {
            id += alphabet.charAt(Math.floor(Math.random() * alphabet.length));
        }
        return id;
    }
    function boot(surfaceEl, statusEl) {
        var win = surfaceEl.ownerDocument ?
            surfaceEl.ownerDocument.defaultView || window : window;
        var doc = surfaceEl.ownerDocument || document;
        var style = doc.createElement("style");
        style.appendChild(doc.createTextNode(STYLE));
        (doc.head || doc.getElementsByTagName("head")[0]).appendChild(style);
        function setStatus(text) {
            statusEl.innerHTML = "";
            statusEl.appendChild(doc.createTextNode(text));
        }
        setStatus("loading surface...");
        httpGetJson("/surfaces", function (err, names) {
            if (err || !names || !names.length) {
                setStatus("no surfaces available");
                return;
            }
            var name = pickSurfaceName(win, names);
            httpGetJson("/surfaces/" + name, function (err2, spec) {
                if (err2) {
                    setStatus("failed to load surface " + name);
                    return;
                }
                start(win, doc, surfaceEl, setStatus, spec);
            });
        });
    }
    Zombitron.boot = boot;
    function start(win, doc, surfaceEl, setStatus, spec) {
        var caps = detectCaps(win);
        var requestedId = randomId();
        var mirror = null;
        var scheme = win.location.protocol === "https:" ? "wss" : "ws";
        var url = scheme + "://" + win.location.host + "/ws";
        var view = Zombitron.Surface.render(surfaceEl, spec, caps, {
            controlChange: function (id, value) {
                conn.send("control_change", { control: id, value: Zombitron.Protocol.clamp01(value) });
            },
            cellToggle: function (instrument, step) {
                var on = true;
                if (mirror && mirror.grid[instrument] &&
                    mirror.grid[instrument][step]) {
                    on = !mirror.grid[instrument][step].on;
                }
                conn.send("seq_cell_set", { instrument: instrument, step: step, on: on, note: null });
            },
        });
        var conn = new Zombitron.Net.Connection({
            url: url,
            requestedId: requestedId,
            surface: spec.name,
            caps: caps,
            topics: ["state/*", "control/*"],
            webSocketImpl: win.WebSocket,
            onStateChange: function (state) {
                setStatus(spec.name + " | " + state +
                    (state === "live" ? " as " + conn.unit : ""));
            },
            onWelcome: function (pl) {
                mirror = Zombitron.State.load(pl.snapshot);
                paintAll();
                setStatus(spec.name + " | live as " + pl.unit);
            },
            onFrame: function (env) {
                if (!mirror) {
                    return;
                }
                if (Zombitron.State.apply(mirror, env.kind, env.pl)) {
                    paint(env.kind, env.pl);
                }
                else if (env.kind === "error") {
                    view.showError(env.pl.code + ": " + env.pl.detail);
                }
            },
        });
        function paint(kind, pl) {
            if (!mirror) {
                return;
            }
            if (kind === "seq_cell_set") {
                view.setCell(pl.instrument, pl.step, mirror.grid[pl.instrument][pl.step].on);
            }
            else if (kind === "step_tick") {
                view.setPlayhead(pl.step);
            }
            else if (kind === "control_change") {
                // hub fans out surface-qualified ids; ours map back to local controls
                var prefix = spec.name + "/";
                var id = pl.control;
                if (id.substring(0, prefix.length) === prefix) {
                    view.setControl(id.substring(prefix.length), pl.value);
                }
            }
        }
        function paintAll() {
            if (!mirror) {
                return;
            }
            for (var i = 0; i < mirror.grid.length; i++) {
                for (var s = 0; s < mirror.grid[i].length; s++) {
                    view.setCell(i, s, mirror.grid[i][s].on);
                }
            }
            view.setPlayhead(mirror.transport.step);
            var prefix = spec.name + "/";
            for (var id in mirror.controls) {
                if (Object.prototype.hasOwnProperty.call(mirror.controls, id) &&
                    id.substring(0, prefix.length) === prefix) {
                    view.setControl(id.substring(prefix.length), mirror.controls[id]);
                }
            }
        }
        conn.start();
        setupSensors(win, doc, spec, caps, conn);
    }
    function setupSensors(win, doc, spec, caps, conn) {
        if (!caps.accelerometer && !caps.gyroscope) {
            return;
        }
        var tiltControls = [];
        for (var i = 0; i < spec.controls.length; i++) {
            if (spec.controls[i].kind === "tilt") {
                tiltControls.push(spec.controls[i]);
            }
        }
        function attach() {
            Zombitron.Sensors.attach(win, Zombitron.Sensors.DEFAULT_THROTTLE_HZ, function (frame) {
                conn.send(frame.kind, frame.pl);
                if (frame.kind === "orientation" && caps.gyroscope) {
                    for (var t = 0; t < tiltControls.length; t++) {
                        var control = tiltControls[t];
                        var axes = control.axes || [];
                        for (var a = 0; a < axes.length; a++) {
                            var value = axes[a] === "alpha" ? frame.pl.alpha / 360 :
                                axes[a] === "beta" ? (frame.pl.beta + 180) / 360 :
                                    (frame.pl.gamma + 90) / 180;
                            conn.send("control_change", {
                                control: control.id + "/" + axes[a],
                                value: Zombitron.Protocol.clamp01(value),
                            });
                        }
                    }
                }
            });
        }
        if (!Zombitron.Sensors.permissionRequired(win)) {
            attach();
            return;
        }
        // permission needs a user gesture: show a one-shot button
        var button = doc.createElement("button");
        button.className = "z-perm";
        button.appendChild(doc.createTextNode("enable motion"));
        button.addEventListener("click", function () {
            Zombitron.Sensors.requestPermission(win, function (result) {
                if (button.parentNode) {
                    button.parentNode.removeChild(button);
                }
                if (result !== "denied") {
                    attach();
                }
            });
        });
        doc.body.appendChild(button);
    }
})(Zombitron || (Zombitron = {}));
