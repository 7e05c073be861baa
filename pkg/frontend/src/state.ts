/**
 * Local mirror of the hub's shared state.
 *
 * The mirror is seeded from the Welcome snapshot and folded forward from the
 * mutation frames the hub fans out; after any quiet moment it must equal the
 * hub's snapshot field for field.
 */
/// <reference path="protocol.ts" />
namespace Zombitron.State {
  export var BPM_MIN = 20;
  export var BPM_MAX = 300;

  export interface Cell { on: boolean; note: number | null; }
  export interface Transport { bpm: number; playing: boolean; step: number; }
  export interface Mirror {
    grid: Cell[][];
    transport: Transport;
    controls: { [id: string]: number };
    revision: number;
  }

  export function load(snapshotText: string): Mirror {
    var obj: any;
    try {
      obj = JSON.parse(snapshotText);
    } catch (e) {
      throw Protocol.protocolError("malformed snapshot");
    }
    if (!obj || !obj.grid || !obj.transport || !obj.controls ||
        typeof obj.revision !== "number") {
      throw Protocol.protocolError("malformed snapshot");
    }
    var grid: Cell[][] = [];
    for (var i = 0; i < obj.grid.length; i++) {
      var row: Cell[] = [];
      for (var j = 0; j < obj.grid[i].length; j++) {
        row.push({ on: !!obj.grid[i][j].on, note: obj.grid[i][j].note });
      }
      grid.push(row);
    }
    var controls: { [id: string]: number } = {};
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

  /**
   * Fold one hub-routed mutation frame into the mirror (in place).
   * Returns false for kinds that don't touch state.
   */
  export function apply(m: Mirror, kind: string, pl: any): boolean {
    if (kind === "control_change") {
      if (!Object.prototype.hasOwnProperty.call(m.controls, pl.control)) {
        // unknown to this mirror: hub validated it, so track it anyway
        m.controls[pl.control] = 0;
      }
      m.controls[pl.control] = pl.value;
    } else if (kind === "seq_cell_set") {
      if (pl.instrument >= 0 && pl.instrument < m.grid.length &&
          pl.step >= 0 && pl.step < m.grid[pl.instrument].length) {
        m.grid[pl.instrument][pl.step] = {
          on: !!pl.on,
          note: pl.note === undefined ? null : pl.note,
        };
      }
    } else if (kind === "transport_set") {
      if (pl.bpm !== null && pl.bpm !== undefined) {
        m.transport.bpm = Protocol.clamp(pl.bpm, BPM_MIN, BPM_MAX);
      }
      if (pl.playing !== null && pl.playing !== undefined) {
        m.transport.playing = pl.playing;
      }
    } else if (kind === "step_tick") {
      m.transport.step = pl.step;
    } else {
      return false;
    }
    m.revision += 1;
    return true;
  }
}
