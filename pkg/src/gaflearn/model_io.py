"""Serialization of classifier graphs and DOT rendering.

The JSON document (format "gaf-model/1") stores every argument and edge at
full float precision, so parsing it back yields a graph whose evaluation is
bit-identical to the original. The DOT rendering groups nodes by layer,
draws supports dashed and attacks solid, and can visually omit weak edges
without touching the model.
"""

from __future__ import annotations

import json
from typing import Sequence

from .errors import GafError, ModelFormatError
from .graph import Argument, LayeredGaf, WeightedEdge

FORMAT_VERSION = "gaf-model/1"


def to_json(gaf: LayeredGaf, metadata: dict | None = None, indent: int | None = 2) -> str:
    """Serialize a graph (plus free-form metadata) as a versioned document."""
    doc = {
        "format": FORMAT_VERSION,
        "layer_sizes": list(gaf.layer_sizes),
        "class_labels": list(gaf.class_labels),
        "arguments": [
            {
                "id": a.id,
                "name": a.name,
                "layer": a.layer_index,
                "base_score": a.base_score,
            }
            for a in gaf.arguments()
        ],
        "edges": [
            {"source": e.source, "target": e.target, "weight": e.weight} for e in gaf.edges
        ],
        "metadata": metadata if metadata is not None else {},
    }
    return json.dumps(doc, indent=indent)


def _expect(doc: dict, key: str, kind, context: str):
    if key not in doc:
        raise ModelFormatError(f"{context}: missing key {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ModelFormatError(f"{context}: {key!r} has type {type(value).__name__}")
    return value


def from_json(text: str) -> tuple[LayeredGaf, dict]:
    """Parse a model document; returns the graph and its metadata."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("document root must be an object")
    version = doc.get("format")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format {version!r}, expected {FORMAT_VERSION!r}")
    layer_sizes = _expect(doc, "layer_sizes", list, "document")
    if not all(isinstance(s, int) and s > 0 for s in layer_sizes):
        raise ModelFormatError("layer_sizes must be positive integers")
    class_labels = _expect(doc, "class_labels", list, "document")
    if not all(isinstance(c, str) for c in class_labels):
        raise ModelFormatError("class_labels must be strings")
    raw_args = _expect(doc, "arguments", list, "document")
    raw_edges = _expect(doc, "edges", list, "document")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ModelFormatError("metadata must be an object")

    layers: list[list[Argument]] = [[] for _ in layer_sizes]
    for i, entry in enumerate(raw_args):
        if not isinstance(entry, dict):
            raise ModelFormatError(f"argument {i}: not an object")
        ctx = f"argument {i}"
        arg_id = _expect(entry, "id", str, ctx)
        name = _expect(entry, "name", str, ctx)
        layer = _expect(entry, "layer", int, ctx)
        score = _expect(entry, "base_score", (int, float), ctx)
        if isinstance(score, bool):
            raise ModelFormatError(f"{ctx}: base_score has type bool")
        if not 0 <= layer < len(layer_sizes):
            raise ModelFormatError(f"{ctx}: layer {layer} out of range")
        layers[layer].append(Argument(id=arg_id, name=name, layer_index=layer, base_score=float(score)))
    for li, (layer, size) in enumerate(zip(layers, layer_sizes)):
        if len(layer) != size:
            raise ModelFormatError(
                f"layer {li} declares {size} arguments but {len(layer)} are listed"
            )

    edges = []
    for i, entry in enumerate(raw_edges):
        if not isinstance(entry, dict):
            raise ModelFormatError(f"edge {i}: not an object")
        ctx = f"edge {i}"
        source = _expect(entry, "source", str, ctx)
        target = _expect(entry, "target", str, ctx)
        weight = _expect(entry, "weight", (int, float), ctx)
        if isinstance(weight, bool):
            raise ModelFormatError(f"{ctx}: weight has type bool")
        edges.append(WeightedEdge(source=source, target=target, weight=float(weight)))

    try:
        gaf = LayeredGaf(layers, edges, tuple(class_labels))
    except GafError as exc:
        raise ModelFormatError(f"document describes an invalid graph: {exc}") from exc
    return gaf, metadata


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(gaf: LayeredGaf, prune_below: float = 0.0) -> str:
    """Render as DOT text, inputs on the left, one rank per layer.

    Support edges (positive weight) are dashed, attacks solid, exact-zero
    weights dotted; labels show the weight to 2 decimals. Edges with
    |weight| < prune_below are left out of the drawing only.
    """
    if prune_below < 0:
        raise ValueError("prune_below must be >= 0")
    lines = ["digraph gaf {", "  rankdir=LR;", "  node [shape=box];"]
    for layer in gaf.layers:
        members = " ".join(
            f"{_quote(a.id)} [label={_quote(a.name)}];" for a in layer
        )
        lines.append("  { rank=same; " + members + " }")
    position = {
        a.id: (li, ai) for li, layer in enumerate(gaf.layers) for ai, a in enumerate(layer)
    }
    for edge in sorted(gaf.edges, key=lambda e: (position[e.source], position[e.target])):
        if abs(edge.weight) < prune_below:
            continue
        if edge.weight > 0:
            style = "dashed"
        elif edge.weight < 0:
            style = "solid"
        else:
            style = "dotted"
        lines.append(
            f"  {_quote(edge.source)} -> {_quote(edge.target)} "
            f'[style={style}, label="{edge.weight:.2f}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
