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
namespace Zombitron.Sensors {
  export var DEFAULT_THROTTLE_HZ = 30;

  export function clampThrottle(hz: number): number {
    return Protocol.clamp(hz || DEFAULT_THROTTLE_HZ, 1, 120);
  }

  export function permissionRequired(win: any): boolean {
    var DME = win.DeviceMotionEvent;
    var DOE = win.DeviceOrientationEvent;
    return !!((DME && typeof DME.requestPermission === "function") ||
              (DOE && typeof DOE.requestPermission === "function"));
  }

  /**
   * Resolve the permission state; cb gets "granted", "denied" or
   * "not-required". Must be called from a user gesture where required.
   */
  export function requestPermission(win: any,
                                    cb: (result: string) => void): void {
    if (!permissionRequired(win)) {
      cb("not-required");
      return;
    }
    var entry = (win.DeviceMotionEvent &&
                 win.DeviceMotionEvent.requestPermission) ||
                win.DeviceOrientationEvent.requestPermission;
    try {
      entry.call(null).then(
        function (result: string) { cb(result === "granted" ? "granted" : "denied"); },
        function () { cb("denied"); }
      );
    } catch (e) {
      cb("denied");
    }
  }

  export interface SensorFrame { kind: string; pl: any; }

  /**
   * Attach throttled listeners; every reading that survives the throttle is
   * normalized into protocol ranges and handed to emit. Returns a detach
   * function.
   */
  export function attach(win: any, throttleHz: number,
                         emit: (frame: SensorFrame) => void): () => void {
    var minGapMs = 1000 / clampThrottle(throttleHz);
    var lastMotion = 0;
    var lastOrientation = 0;

    function onMotion(ev: any): void {
      var now = new Date().getTime();
      if (now - lastMotion < minGapMs) { return; }
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

    function onOrientation(ev: any): void {
      var now = new Date().getTime();
      if (now - lastOrientation < minGapMs) { return; }
      lastOrientation = now;
      emit({
        kind: "orientation",
        pl: {
          alpha: Protocol.wrapAlpha(ev.alpha),
          beta: Protocol.clamp(num(ev.beta), -180, 180),
          gamma: Protocol.clamp(num(ev.gamma), -90, 90),
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

  function num(x: any): number {
    return typeof x === "number" && isFinite(x) ? x : 0;
  }
}
