"use strict";
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
        class Connection {
            constructor(opts) {
                this.state = "connecting";
                this.ws = null;
                this.seq = 0;
                this.attempt = 0;
                this.queue = [];
                this.stopped = false;
                this.opts = opts;
                this.unit = opts.requestedId;
            }
            start() {
                this.open();
            }
            stop() {
                this.stopped = true;
                if (this.ws) {
                    try {
                        this.ws.close();
                    }
                    catch (e) { /* already dead */ }
                }
            }
            /** Send one payload. Returns true if it went (or was queued). */
            send(kind, pl) {
                if (this.state === "live" && this.ws && this.ws.readyState === 1) {
                    this.push(kind, pl);
                    return true;
                }
                if (!SENSOR_KINDS[kind]) {
                    this.queue.push({ kind: kind, pl: pl });
                    return true;
                }
                return false;
            }
            push(kind, pl) {
                var env = Zombitron.Protocol.makeEnvelope(kind, this.unit, this.seq, new Date().getTime(), pl);
                this.seq += 1;
                this.ws.send(Zombitron.Protocol.encodeEnvelope(env));
            }
            setState(state) {
                this.state = state;
                if (this.opts.onStateChange) {
                    this.opts.onStateChange(state);
                }
            }
            open() {
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
                    var env;
                    try {
                        env = Zombitron.Protocol.decodeEnvelope(ev.data);
                    }
                    catch (e) {
                        return; // junk frame; the hub is authoritative, just skip it
                    }
                    self.handle(env);
                };
                ws.onclose = function () { self.dropped(); };
                ws.onerror = function () { };
            }
            handle(env) {
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
            }
            flush() {
                var pending = this.queue;
                this.queue = [];
                for (var i = 0; i < pending.length; i++) {
                    this.push(pending[i].kind, pending[i].pl);
                }
            }
            dropped() {
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
            }
        }
        Net.Connection = Connection;
    })(Net = Zombitron.Net || (Zombitron.Net = {}));
})(Zombitron || (Zombitron = {}));
