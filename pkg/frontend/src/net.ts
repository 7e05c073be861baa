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
namespace Zombitron.Net {
  export var BACKOFF_BASE_MS = 500;
  export var BACKOFF_CAP_MS = 8000;

  export function backoffMs(attempt: number): number {
    var ms = BACKOFF_BASE_MS;
    for (var i = 0; i < attempt; i++) {
      ms *= 2;
      if (ms >= BACKOFF_CAP_MS) { return BACKOFF_CAP_MS; }
    }
    return ms;
  }

  var SENSOR_KINDS: { [k: string]: boolean } = {
    touch: true, motion: true, orientation: true,
  };

  export interface ConnectionOptions {
    url: string;
    requestedId: string;
    surface: string | null;
    caps: any;
    topics: string[];
    onWelcome?: (pl: any) => void;
    onFrame?: (env: Protocol.Envelope) => void;
    onStateChange?: (state: string) => void;
    /** injectable for tests / non-browser hosts */
    webSocketImpl?: any;
    setTimeoutImpl?: (fn: () => void, ms: number) => any;
  }

  export class Connection {
    state: string = "connecting";
    unit: string;
    private opts: ConnectionOptions;
    private ws: any = null;
    private seq = 0;
    private attempt = 0;
    private queue: Array<{ kind: string; pl: any }> = [];
    private stopped = false;

    constructor(opts: ConnectionOptions) {
      this.opts = opts;
      this.unit = opts.requestedId;
    }

    start(): void {
      this.open();
    }

    stop(): void {
      this.stopped = true;
      if (this.ws) {
        try { this.ws.close(); } catch (e) { /* already dead */ }
      }
    }

    /** Send one payload. Returns true if it went (or was queued). */
    send(kind: string, pl: any): boolean {
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

    private push(kind: string, pl: any): void {
      var env = Protocol.makeEnvelope(kind, this.unit, this.seq,
                                      new Date().getTime(), pl);
      this.seq += 1;
      this.ws.send(Protocol.encodeEnvelope(env));
    }

    private setState(state: string): void {
      this.state = state;
      if (this.opts.onStateChange) { this.opts.onStateChange(state); }
    }

    private open(): void {
      if (this.stopped) { return; }
      var WS = this.opts.webSocketImpl ||
               (typeof WebSocket !== "undefined" ? WebSocket : null);
      if (!WS) { throw Protocol.protocolError("no websocket available"); }
      var self = this;
      this.seq = 0;  // fresh session, fresh sequence space
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
      ws.onmessage = function (ev: any) {
        var data = ev.data;
        if (data && typeof data !== "string" && typeof data.toString === "function") {
          data = data.toString();  // some stacks hand text frames over as buffers
        }
        var env: Protocol.Envelope;
        try {
          env = Protocol.decodeEnvelope(data);
        } catch (e) {
          return;  // junk frame; the hub is authoritative, just skip it
        }
        self.handle(env);
      };
      ws.onclose = function () { self.dropped(); };
      ws.onerror = function () { /* onclose follows */ };
    }

    private handle(env: Protocol.Envelope): void {
      if (env.kind === "welcome") {
        this.unit = env.pl.unit;
        this.attempt = 0;
        this.setState("live");
        if (this.opts.onWelcome) { this.opts.onWelcome(env.pl); }
        this.flush();
        return;
      }
      if (env.kind === "ping") {
        if (this.ws && this.ws.readyState === 1) {
          this.push("pong", { nonce: env.pl.nonce, hub_ts_ms: env.ts });
        }
        return;
      }
      if (this.opts.onFrame) { this.opts.onFrame(env); }
    }

    private flush(): void {
      var pending = this.queue;
      this.queue = [];
      for (var i = 0; i < pending.length; i++) {
        this.push(pending[i].kind, pending[i].pl);
      }
    }

    private dropped(): void {
      if (this.stopped) { return; }
      if (this.ws) {
        this.ws.onopen = this.ws.onmessage = this.ws.onclose = null;
        this.ws = null;
      }
      var delay = backoffMs(this.attempt);
      this.attempt += 1;
      this.setState("reconnecting");
      var self = this;
      var later = this.opts.setTimeoutImpl || function (fn: () => void, ms: number) {
        return setTimeout(fn, ms);
      };
      later(function () { self.open(); }, delay);
    }
  }
}
