"use strict";
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
