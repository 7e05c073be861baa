"use strict";
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
