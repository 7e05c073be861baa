/**
 * DOM renderer for surface specs.
 *
 * Everything is plain absolutely-positioned/percentage-sized divs with big
 * hit targets — it has to survive cracked 320px screens and browsers that
 * never heard of CSS grid. Values always leave here normalized to [0,1] in
 * control-local space.
 */
/// <reference path="protocol.ts" />
namespace Zombitron.Surface {
  export interface ControlSpec {
    id: string;
    kind: string;
    rows?: number;
    cols?: number;
    instruments?: number;
    steps?: number;
    axes?: string[];
    label?: string;
  }

  export interface Spec {
    name: string;
    requires: string[];
    controls: ControlSpec[];
  }

  export interface Handlers {
    controlChange(id: string, value: number): void;
    cellToggle(instrument: number, step: number): void;
  }

  export interface View {
    root: HTMLElement;
    setCell(instrument: number, step: number, on: boolean): void;
    setPlayhead(step: number): void;
    setControl(id: string, value: number): void;
    showError(message: string): void;
  }

  function el(doc: Document, cls: string): HTMLElement {
    var node = doc.createElement("div");
    node.className = cls;
    return node;
  }

  /** Pointer position -> [0,1] x/y inside the element, touch or mouse. */
  export function pointerFraction(target: HTMLElement, ev: any): { x: number; y: number } {
    var point = ev.touches && ev.touches.length ? ev.touches[0] : ev;
    var rect = target.getBoundingClientRect();
    var w = rect.width || 1;
    var h = rect.height || 1;
    return {
      x: Protocol.clamp01((point.clientX - rect.left) / w),
      y: Protocol.clamp01((point.clientY - rect.top) / h),
    };
  }

  function onPress(node: HTMLElement, fn: (ev: any) => void,
                   alsoMove: boolean): void {
    var dragging = false;
    function down(ev: any): void {
      dragging = true;
      fn(ev);
      if (ev.preventDefault) { ev.preventDefault(); }
    }
    function move(ev: any): void {
      if (dragging && alsoMove) { fn(ev); }
    }
    function up(): void { dragging = false; }
    node.addEventListener("touchstart", down);
    node.addEventListener("touchmove", move);
    node.addEventListener("touchend", up);
    node.addEventListener("mousedown", down);
    node.addEventListener("mousemove", move);
    node.addEventListener("mouseup", up);
    node.addEventListener("mouseleave", up);
  }

  export function render(root: HTMLElement, spec: Spec, caps: any,
                         handlers: Handlers): View {
    var doc = root.ownerDocument || document;
    root.innerHTML = "";
    var cells: { [key: string]: HTMLElement } = {};
    var fills: { [id: string]: HTMLElement } = {};
    var playheadCols: HTMLElement[][] = [];
    var errorPanel: HTMLElement | null = null;

    for (var c = 0; c < spec.controls.length; c++) {
      var control = spec.controls[c];
      var block = el(doc, "z-control z-" + control.kind);
      block.setAttribute("data-control", control.id);
      block.setAttribute("data-kind", control.kind);
      if (control.kind === "step_sequencer") {
        buildSequencer(doc, block, control, cells, playheadCols, handlers);
      } else if (control.kind === "slider") {
        buildLinear(doc, block, control, fills, handlers, true);
      } else if (control.kind === "pot") {
        buildLinear(doc, block, control, fills, handlers, false);
      } else if (control.kind === "xy") {
        buildXy(doc, block, control, handlers);
      } else if (control.kind === "pad_grid") {
        buildPads(doc, block, control, handlers);
      } else if (control.kind === "tilt") {
        buildTilt(doc, block, control, caps);
      } else {
        // unknown control kind: visible panel, session stays live
        block.className = "z-control z-error";
        block.appendChild(doc.createTextNode(
          "unsupported control: " + control.kind));
      }
      root.appendChild(block);
    }

    return {
      root: root,
      setCell: function (instrument: number, step: number, on: boolean): void {
        var node = cells[instrument + "_" + step];
        if (node) {
          node.className = on ? "z-cell z-on" : "z-cell";
        }
      },
      setPlayhead: function (step: number): void {
        for (var g = 0; g < playheadCols.length; g++) {
          var cols = playheadCols[g];
          for (var s = 0; s < cols.length; s++) {
            var suffix = s === step ? " z-now" : "";
            var col = cols[s];
            col.className = col.className.replace(/ z-now/g, "") + suffix;
          }
        }
      },
      setControl: function (id: string, value: number): void {
        var fill = fills[id];
        if (fill) {
          fill.style.height = Math.round(value * 100) + "%";
        }
      },
      showError: function (message: string): void {
        if (!errorPanel) {
          errorPanel = el(doc, "z-error-panel");
          root.appendChild(errorPanel);
        }
        errorPanel.innerHTML = "";
        errorPanel.appendChild(doc.createTextNode(message));
      },
    };
  }

  function buildSequencer(doc: Document, block: HTMLElement,
                          control: ControlSpec,
                          cells: { [key: string]: HTMLElement },
                          playheadCols: HTMLElement[][],
                          handlers: Handlers): void {
    var instruments = control.instruments || 1;
    var steps = control.steps || 8;
    var cols: HTMLElement[] = [];
    for (var i = 0; i < instruments; i++) {
      var row = el(doc, "z-seq-row");
      for (var s = 0; s < steps; s++) {
        var cell = el(doc, "z-cell");
        cell.setAttribute("data-inst", String(i));
        cell.setAttribute("data-step", String(s));
        cell.style.width = (100 / steps) + "%";
        (function (inst: number, st: number) {
          onPress(cell, function () { handlers.cellToggle(inst, st); }, false);
        })(i, s);
        cells[i + "_" + s] = cell;
        row.appendChild(cell);
        if (i === 0) { cols.push(cell); }
      }
      block.appendChild(row);
    }
    // playhead marks the whole column via the top row's cells
    var columnMarks: HTMLElement[] = [];
    for (var s2 = 0; s2 < steps; s2++) {
      columnMarks.push(cols[s2]);
    }
    playheadCols.push(columnMarks);
  }

  function buildLinear(doc: Document, block: HTMLElement, control: ControlSpec,
                       fills: { [id: string]: HTMLElement },
                       handlers: Handlers, vertical: boolean): void {
    var fill = el(doc, "z-fill");
    block.appendChild(fill);
    var label = el(doc, "z-label");
    label.appendChild(doc.createTextNode(control.label || control.id));
    block.appendChild(label);
    fills[control.id] = fill;
    onPress(block, function (ev: any) {
      var frac = pointerFraction(block, ev);
      // up = more, for both sliders and pots
      var value = 1 - frac.y;
      fill.style.height = Math.round(value * 100) + "%";
      handlers.controlChange(control.id, value);
    }, true);
  }

  function buildXy(doc: Document, block: HTMLElement, control: ControlSpec,
                   handlers: Handlers): void {
    var dot = el(doc, "z-dot");
    block.appendChild(dot);
    onPress(block, function (ev: any) {
      var frac = pointerFraction(block, ev);
      dot.style.left = Math.round(frac.x * 100) + "%";
      dot.style.top = Math.round(frac.y * 100) + "%";
      handlers.controlChange(control.id + "/x", frac.x);
      handlers.controlChange(control.id + "/y", 1 - frac.y);
    }, true);
  }

  function buildPads(doc: Document, block: HTMLElement, control: ControlSpec,
                     handlers: Handlers): void {
    var rows = control.rows || 1;
    var colsN = control.cols || 1;
    for (var r = 0; r < rows; r++) {
      var rowEl = el(doc, "z-pad-row");
      for (var col = 0; col < colsN; col++) {
        var pad = el(doc, "z-pad");
        pad.style.width = (100 / colsN) + "%";
        (function (id: string, node: HTMLElement) {
          node.addEventListener("touchstart", function (ev: any) {
            handlers.controlChange(id, 1);
            if (ev.preventDefault) { ev.preventDefault(); }
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

  function buildTilt(doc: Document, block: HTMLElement, control: ControlSpec,
                     caps: any): void {
    var label = el(doc, "z-label");
    var text = control.label || control.id;
    if (!caps || !caps.gyroscope) {
      block.className += " z-disabled";
      text += " (needs gyroscope)";
    } else {
      text += " (tilt)";
    }
    label.appendChild(doc.createTextNode(text));
    block.appendChild(label);
  }
}
