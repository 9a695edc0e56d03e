"""Layered gradual argumentation graphs and their logistic-update semantics.

Arguments carry an apriori base score in [0, 1]; directed weighted edges
attack (negative weight) or support (positive weight) their target. An
argument's strength is obtained by summing the weighted strengths of its
attackers and supporters (aggregation) and pushing the base score's
log-odds plus that aggregate through the logistic function (influence).
Layered acyclic graphs under this semantics behave exactly like sparse
multilayer perceptrons, so a classification graph doubles as a trainable
model: input arguments are binarized features, output arguments are the
class labels, and the class distribution is the softmax of the output
pre-activations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InputShapeError, InvalidGraphError
from .util import expit, logit, softmax_rows

BASE_SCORE_MIN = 1e-6
BASE_SCORE_MAX = 1.0 - 1e-6


class Polarity(enum.Enum):
    ATTACK = "attack"
    SUPPORT = "support"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class Argument:
    """A node: unique id, display name, layer position, apriori base score."""

    id: str
    name: str
    layer_index: int
    base_score: float


@dataclass(frozen=True)
class WeightedEdge:
    """Directed edge; the sign of the weight decides attack vs support."""

    source: str
    target: str
    weight: float


def edge_polarity(edge: WeightedEdge) -> Polarity:
    if edge.weight < 0:
        return Polarity.ATTACK
    if edge.weight > 0:
        return Polarity.SUPPORT
    return Polarity.NEUTRAL


@dataclass(frozen=True)
class GafStructure:
    """Connection structure only: which forward edges exist, no weights.

    Blocks are (source_layer, target_layer, boolean mask) with mask shape
    (size of source layer, size of target layer).
    """

    layer_sizes: tuple[int, ...]
    blocks: tuple[tuple[int, int, np.ndarray], ...]

    def __post_init__(self) -> None:
        if len(self.layer_sizes) < 2:
            raise InvalidGraphError("a layered graph needs at least 2 layers")
        if any(s < 1 for s in self.layer_sizes):
            raise InvalidGraphError("layer sizes must be positive")
        seen = set()
        for src, dst, mask in self.blocks:
            if not (0 <= src < dst < len(self.layer_sizes)):
                raise InvalidGraphError(f"block ({src},{dst}) is not a forward layer pair")
            if (src, dst) in seen:
                raise InvalidGraphError(f"duplicate block ({src},{dst})")
            seen.add((src, dst))
            if mask.shape != (self.layer_sizes[src], self.layer_sizes[dst]):
                raise InvalidGraphError(f"block ({src},{dst}) mask shape {mask.shape} mismatch")

    @staticmethod
    def fully_connected(layer_sizes: Sequence[int]) -> "GafStructure":
        sizes = tuple(int(s) for s in layer_sizes)
        blocks = tuple(
            (i, i + 1, np.ones((sizes[i], sizes[i + 1]), dtype=bool))
            for i in range(len(sizes) - 1)
        )
        return GafStructure(sizes, blocks)

    @property
    def n_connections(self) -> int:
        return int(sum(m.sum() for _, _, m in self.blocks))


@dataclass(frozen=True)
class Interpretation:
    """Strengths for every argument plus the softmax class distribution."""

    strengths: Mapping[str, float]
    output_distribution: np.ndarray


class LayeredGaf:
    """An immutable layered acyclic argumentation graph.

    Layer 0 holds the input arguments, the last layer the output arguments.
    Every edge points from a lower-indexed layer to a strictly higher one,
    so acyclicity holds by construction and evaluation is a single forward
    sweep. When ``class_labels`` is non-empty the graph is a classifier and
    must have one output argument per label (at least two).
    """

    def __init__(
        self,
        layers: Sequence[Sequence[Argument]],
        edges: Sequence[WeightedEdge],
        class_labels: Sequence[str] = (),
    ) -> None:
        self._layers = tuple(tuple(layer) for layer in layers)
        self._edges = tuple(edges)
        self._class_labels = tuple(class_labels)
        self._validate()
        self._compiled: _Compiled | None = None

    def _validate(self) -> None:
        if len(self._layers) < 2:
            raise InvalidGraphError("a layered graph needs at least 2 layers")
        ids: dict[str, int] = {}
        names = set()
        for li, layer in enumerate(self._layers):
            if not layer:
                raise InvalidGraphError(f"layer {li} is empty")
            for arg in layer:
                if arg.layer_index != li:
                    raise InvalidGraphError(
                        f"argument {arg.id!r} declares layer {arg.layer_index}, placed in {li}"
                    )
                if not arg.name:
                    raise InvalidGraphError(f"argument {arg.id!r} has an empty name")
                if arg.name in names:
                    raise InvalidGraphError(f"duplicate argument name {arg.name!r}")
                names.add(arg.name)
                if arg.id in ids:
                    raise InvalidGraphError(f"duplicate argument id {arg.id!r}")
                ids[arg.id] = li
                if math.isnan(arg.base_score) or not 0.0 <= arg.base_score <= 1.0:
                    raise InvalidGraphError(
                        f"base score of {arg.id!r} must lie in [0,1], got {arg.base_score}"
                    )
        pairs = set()
        for e in self._edges:
            if e.source not in ids or e.target not in ids:
                raise InvalidGraphError(f"edge ({e.source},{e.target}) references unknown argument")
            if ids[e.source] >= ids[e.target]:
                raise InvalidGraphError(
                    f"edge ({e.source},{e.target}) must point to a deeper layer"
                )
            if (e.source, e.target) in pairs:
                raise InvalidGraphError(f"duplicate edge ({e.source},{e.target})")
            pairs.add((e.source, e.target))
            if math.isnan(e.weight):
                raise InvalidGraphError(f"edge ({e.source},{e.target}) has NaN weight")
        if self._class_labels:
            if len(self._class_labels) != len(self._layers[-1]):
                raise InvalidGraphError(
                    f"{len(self._class_labels)} class labels for "
                    f"{len(self._layers[-1])} output arguments"
                )
            if len(self._class_labels) < 2:
                raise InvalidGraphError("a classifier needs at least 2 classes")
            if len(set(self._class_labels)) != len(self._class_labels):
                raise InvalidGraphError("class labels must be unique")

    @property
    def layers(self) -> tuple[tuple[Argument, ...], ...]:
        return self._layers

    @property
    def edges(self) -> tuple[WeightedEdge, ...]:
        return self._edges

    @property
    def class_labels(self) -> tuple[str, ...]:
        return self._class_labels

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple(len(layer) for layer in self._layers)

    @property
    def depth(self) -> int:
        return len(self._layers) - 1

    def arguments(self) -> tuple[Argument, ...]:
        """All arguments in layer-major order (the canonical vector order)."""
        return tuple(arg for layer in self._layers for arg in layer)

    def input_arguments(self) -> tuple[Argument, ...]:
        return self._layers[0]

    def output_arguments(self) -> tuple[Argument, ...]:
        return self._layers[-1]

    def parameters(self) -> tuple[GafStructure, list[np.ndarray], list[np.ndarray]]:
        """Decompose into (structure, per-block weight matrices, per-layer biases).

        Biases are the log-odds of the base scores of non-input layers
        (+/-inf for base scores exactly 0 or 1).
        """
        c = self._compile()
        structure = GafStructure(
            self.layer_sizes,
            tuple((src, dst, m.copy()) for (src, dst, _), m in zip(c.blocks, c.masks)),
        )
        return structure, [w.copy() for _, _, w in c.blocks], [b.copy() for b in c.biases]

    def connection_count(self) -> int:
        return len(self._edges)

    # -- evaluation ----------------------------------------------------

    def _compile(self) -> "_Compiled":
        if self._compiled is not None:
            return self._compiled
        index = {
            arg.id: (li, ai)
            for li, layer in enumerate(self._layers)
            for ai, arg in enumerate(layer)
        }
        sizes = self.layer_sizes
        weights: dict[tuple[int, int], np.ndarray] = {}
        present: dict[tuple[int, int], np.ndarray] = {}
        for e in self._edges:
            sl, si = index[e.source]
            tl, ti = index[e.target]
            block = weights.setdefault((sl, tl), np.zeros((sizes[sl], sizes[tl])))
            mask = present.setdefault((sl, tl), np.zeros((sizes[sl], sizes[tl]), dtype=bool))
            block[si, ti] = e.weight
            mask[si, ti] = True
        blocks = tuple((src, dst, weights[(src, dst)]) for src, dst in sorted(weights))
        masks = tuple(present[(src, dst)] for src, dst, _ in blocks)
        with np.errstate(divide="ignore"):
            biases = [
                logit(np.array([a.base_score for a in layer], dtype=np.float64))
                for layer in self._layers[1:]
            ]
        self._compiled = _Compiled(blocks=blocks, masks=masks, biases=biases)
        return self._compiled


@dataclass
class _Compiled:
    blocks: tuple[tuple[int, int, np.ndarray], ...]
    masks: tuple[np.ndarray, ...]
    biases: list[np.ndarray]  # one per layer 1..L, log-odds of base scores


def _forward_strengths(gaf: LayeredGaf, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Shared forward sweep; returns per-layer strengths and output pre-activations."""
    c = gaf._compile()
    n_layers = len(gaf.layer_sizes)
    strengths: list[np.ndarray] = [x]
    z_out = None
    for t in range(1, n_layers):
        z = np.array(c.biases[t - 1], copy=True)
        if x.ndim == 2:
            z = np.broadcast_to(z, (x.shape[0], z.shape[-1])).copy()
        for src, dst, w in c.blocks:
            if dst == t:
                z += strengths[src] @ w
        strengths.append(expit(z))
        if t == n_layers - 1:
            z_out = z
    assert z_out is not None
    return strengths, z_out


def _check_input(gaf: LayeredGaf, input_strengths: Sequence[float]) -> np.ndarray:
    x = np.asarray(input_strengths, dtype=np.float64)
    n_in = gaf.layer_sizes[0]
    if x.ndim != 1 or x.shape[0] != n_in:
        raise InputShapeError(
            f"expected {n_in} input strengths, got shape {x.shape}"
        )
    if not np.isfinite(x).all() or (x < 0).any() or (x > 1).any():
        raise InputShapeError("input strengths must be finite values in [0,1]")
    return x


def evaluate(gaf: LayeredGaf, input_strengths: Sequence[float]) -> Interpretation:
    """Compute every argument's strength and the softmax class distribution.

    Input arguments carry the given values directly; each deeper argument's
    strength is the logistic of its base-score log-odds plus the weighted
    sum of its incoming strengths. Base scores exactly 0 or 1 pin the
    strength there no matter the attackers or supporters. The class
    distribution is the softmax over the output layer's pre-activations.
    Pure and deterministic: identical inputs give bit-identical outputs.
    """
    x = _check_input(gaf, input_strengths)
    per_layer, z_out = _forward_strengths(gaf, x)
    dist = softmax_rows(z_out)[0]
    strengths: dict[str, float] = {}
    for layer, values in zip(gaf.layers, per_layer):
        for arg, v in zip(layer, values):
            strengths[arg.id] = float(v)
    return Interpretation(strengths=strengths, output_distribution=dist)


def output_distributions(gaf: LayeredGaf, matrix: np.ndarray) -> np.ndarray:
    """Batched class distributions, one row per instance."""
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != gaf.layer_sizes[0]:
        raise InputShapeError(
            f"expected (n, {gaf.layer_sizes[0]}) inputs, got shape {x.shape}"
        )
    _, z_out = _forward_strengths(gaf, x)
    return softmax_rows(z_out)


def strength_trajectory(
    gaf: LayeredGaf, input_strengths: Sequence[float], iterations: int
) -> list[np.ndarray]:
    """Synchronous strength updates, returning vectors for iterations 0..n.

    Iteration 0 is the base-score vector with inputs at their given values;
    every later iteration updates all non-input arguments at once from the
    previous vector. For a graph of depth d the vectors are constant from
    iteration d onward.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    x = _check_input(gaf, input_strengths)
    args = gaf.arguments()
    n = len(args)
    pos = {arg.id: i for i, arg in enumerate(args)}
    adj = np.zeros((n, n))
    for e in gaf.edges:
        adj[pos[e.source], pos[e.target]] = e.weight
    n_in = gaf.layer_sizes[0]
    beta = np.array([a.base_score for a in args], dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_odds = logit(beta[n_in:])
    s = beta.copy()
    s[:n_in] = x
    out = [s.copy()]
    for _ in range(iterations):
        agg = s @ adj
        s_next = s.copy()
        s_next[n_in:] = expit(log_odds + agg[n_in:])
        s = s_next
        out.append(s.copy())
    return out


def connection_count(gaf: LayeredGaf) -> int:
    return gaf.connection_count()


def prune_inert_edges(gaf: LayeredGaf) -> LayeredGaf:
    """Drop edges that provably cannot influence any output distribution.

    An edge matters only if its target is an output argument or lies on a
    directed path to one. Removing the rest changes the strengths of the
    orphaned arguments but leaves every class distribution bit-identical,
    so the pruned graph is an equivalent, more readable classifier.
    """
    reach = {a.id for a in gaf.output_arguments()}
    changed = True
    while changed:
        changed = False
        for edge in gaf.edges:
            if edge.target in reach and edge.source not in reach:
                reach.add(edge.source)
                changed = True
    kept = tuple(e for e in gaf.edges if e.target in reach)
    if len(kept) == len(gaf.edges):
        return gaf
    return LayeredGaf(
        layers=gaf.layers, edges=kept, class_labels=gaf.class_labels
    )


def clamp_base_score(value: float) -> float:
    return min(max(value, BASE_SCORE_MIN), BASE_SCORE_MAX)


def build_gaf(
    structure: GafStructure,
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    input_names: Sequence[str],
    class_labels: Sequence[str],
    hidden_name_format: str = "m{layer}_{index}",
) -> LayeredGaf:
    """Assemble a named classifier graph from trained parameters.

    Biases are log-odds; they become clamped base scores in
    [1e-6, 1 - 1e-6]. Input arguments get the neutral base score 0.5
    (their strength is always the supplied feature value). Only edges
    present in the structure are materialized, and only with their
    trained weights.
    """
    sizes = structure.layer_sizes
    if len(input_names) != sizes[0]:
        raise InvalidGraphError(f"{len(input_names)} input names for {sizes[0]} inputs")
    if len(class_labels) != sizes[-1]:
        raise InvalidGraphError(f"{len(class_labels)} labels for {sizes[-1]} outputs")
    layers: list[list[Argument]] = []
    for li, size in enumerate(sizes):
        layer = []
        for ai in range(size):
            if li == 0:
                name = input_names[ai]
                beta = 0.5
            else:
                if li == len(sizes) - 1:
                    name = str(class_labels[ai])
                else:
                    name = hidden_name_format.format(layer=li, index=ai)
                beta = clamp_base_score(float(expit(biases[li - 1][ai])))
            layer.append(Argument(id=f"a{li}_{ai}", name=name, layer_index=li, base_score=beta))
        layers.append(layer)
    edges = []
    for (src, dst, mask), w in zip(structure.blocks, weights):
        rows, cols = np.nonzero(mask)
        for r, col in zip(rows.tolist(), cols.tolist()):
            edges.append(
                WeightedEdge(source=f"a{src}_{r}", target=f"a{dst}_{col}", weight=float(w[r, col]))
            )
    return LayeredGaf(layers, edges, class_labels)
