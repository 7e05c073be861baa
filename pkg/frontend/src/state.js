"use strict";
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
