"use strict";
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
