"""Manifest files: the schema for a verification run and its object builders.

A manifest is one YAML document.  Schema problems split into two exception
families so the command line can distinguish exit codes: ParseError for
text or expression-grammar failures, ValidationError for well-formed but
inconsistent contents (unknown charts, broken cocycles, wrong shapes).

Construction of the heavyweight objects (cover, bundle, connections,
frames, primitives) is memoized and deferred until a task asks; preflight
forces everything the declared tasks will need so failures surface before
any task runs.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction

import yaml

from .algebroid import AtiyahChart, Connection, curvature
from .cartan import (
    ChartMap,
    MatrixForm,
    VectorField,
    ext_d,
    mat_wedge_pair,
    parse_form,
    parse_matrix_form,
    poincare_primitive,
)
from .cech import BundleCocycle, CoverSpec, cotangent_bundle, induced_connections
from .ring import Context, ExpressionSyntaxError, RingError, parse_scalar
from .vertex import FrameEVA

KNOWN_TASKS = ("check-axioms", "pontryagin", "ch2", "eva-class",
               "compare-classes", "verify-lemmas")
COVER_TASKS = ("pontryagin", "ch2", "eva-class", "compare-classes")

DEFAULT_SEED = 0
DEFAULT_DEGREE_BOUND = 6
DEFAULT_SAMPLES = 50


class ParseError(Exception):
    """The manifest text or an embedded expression literal does not parse."""


class ValidationError(Exception):
    """The manifest parses but declares something inconsistent."""


def _literal(value, where):
    """Expression cells must be strings; bare YAML integers are tolerated."""
    if isinstance(value, str):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    raise ValidationError("%s must be an expression string, got %r" % (where, value))


def _scalar(ctx, value, where):
    try:
        return parse_scalar(ctx, _literal(value, where))
    except ExpressionSyntaxError as exc:
        raise ParseError("%s: %s" % (where, exc))
    except RingError as exc:
        raise ParseError("%s: %s" % (where, exc))


def _form(ctx, value, where, degree=None):
    try:
        out = parse_form(ctx, _literal(value, where))
    except ExpressionSyntaxError as exc:
        raise ParseError("%s: %s" % (where, exc))
    except RingError as exc:
        raise ParseError("%s: %s" % (where, exc))
    if degree is not None and not out.is_homogeneous(degree):
        raise ValidationError("%s must be a %d-form" % (where, degree))
    return out


def _string_list(value, where):
    if not isinstance(value, list) or not value or \
            any(not isinstance(v, str) for v in value):
        raise ValidationError("%s must be a non-empty list of strings" % where)
    return list(value)


class Manifest:
    """Parsed, schema-checked manifest plus memoized object builders."""

    def __init__(self, text: str):
        self.text = text
        self.sha256 = hashlib.sha256(text.encode("utf-8")).hexdigest()
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ParseError("manifest is not well-formed YAML: %s" % exc)
        if not isinstance(data, dict):
            raise ParseError("manifest must be a mapping at top level")
        self.data = data
        self._built = {}
        self._check_schema()

    @classmethod
    def load(cls, path) -> "Manifest":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ParseError("cannot read manifest: %s" % exc)
        return cls(text)

    # ------------------------------------------------------------- schema

    def _check_schema(self):
        data = self.data
        known = {"version", "variables", "charts", "transitions", "nerve",
                 "bundle", "connections", "frames", "primitives", "tasks",
                 "seed", "degree_bound", "samples"}
        for key in data:
            if key not in known:
                raise ValidationError("unknown manifest field %r" % (key,))
        if "version" not in data:
            raise ValidationError("manifest must declare a version")
        self.version = str(data["version"])

        tasks = data.get("tasks")
        if not isinstance(tasks, list) or not tasks:
            raise ValidationError("manifest must declare a non-empty tasks list")
        for t in tasks:
            if t not in KNOWN_TASKS:
                raise ValidationError("unknown task %r; known tasks: %s"
                                      % (t, ", ".join(KNOWN_TASKS)))
        if len(set(tasks)) != len(tasks):
            raise ValidationError("tasks list contains duplicates")
        self.tasks = list(tasks)

        self.seed = self._int_field("seed", DEFAULT_SEED, minimum=0)
        self.degree_bound = self._int_field("degree_bound", DEFAULT_DEGREE_BOUND, minimum=0)
        self.samples = self._int_field("samples", DEFAULT_SAMPLES, minimum=1)

        needs_context = [t for t in self.tasks if t != "verify-lemmas"]
        if needs_context and "variables" not in data:
            raise ValidationError("tasks %r need a variables list" % (needs_context,))
        needs_cover = [t for t in self.tasks if t in COVER_TASKS]
        if needs_cover:
            for field in ("charts", "nerve"):
                if field not in data:
                    raise ValidationError("tasks %r need a %s field"
                                          % (needs_cover, field))

    def _int_field(self, name, default, minimum):
        value = self.data.get(name, default)
        if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
            raise ValidationError("%s must be an integer >= %d" % (name, minimum))
        return value

    # ------------------------------------------------------------- builders

    def _memo(self, key, build):
        if key not in self._built:
            self._built[key] = build()
        return self._built[key]

    def context(self) -> Context:
        def build():
            names = _string_list(self.data.get("variables"), "variables")
            try:
                return Context(names)
            except (ValueError, RingError) as exc:
                raise ValidationError("variables: %s" % exc)
        return self._memo("context", build)

    def chart_names(self):
        names = _string_list(self.data.get("charts"), "charts")
        if len(set(names)) != len(names):
            raise ValidationError("chart names must be unique")
        return names

    def cover(self) -> CoverSpec:
        return self._memo("cover", self._build_cover)

    def _build_cover(self):
        ctx = self.context()
        names = self.chart_names()
        index = {name: k for k, name in enumerate(names)}

        nerve = []
        raw_nerve = self.data.get("nerve")
        if not isinstance(raw_nerve, list) or not raw_nerve:
            raise ValidationError("nerve must be a non-empty list of chart lists")
        for entry in raw_nerve:
            simplex = _string_list(entry, "nerve entry")
            for name in simplex:
                if name not in index:
                    raise ValidationError("nerve entry %r names unknown chart %r"
                                          % (entry, name))
            idx = tuple(index[name] for name in simplex)
            if list(idx) != sorted(set(idx)) or len(idx) < 2:
                raise ValidationError(
                    "nerve entry %r must list distinct charts in declaration order"
                    % (entry,))
            nerve.append(idx)

        transitions = {}
        for row in self.data.get("transitions", []) or []:
            if not isinstance(row, dict) or "from" not in row or "to" not in row:
                raise ValidationError("transitions entries need from/to fields")
            src, dst = row["from"], row["to"]
            for name in (src, dst):
                if name not in index:
                    raise ValidationError("transition names unknown chart %r" % (name,))
            if src == dst:
                raise ValidationError("transition from %r to itself" % (src,))
            key = (index[src], index[dst])
            if key in transitions:
                raise ValidationError("duplicate transition %r -> %r" % (src, dst))
            images = row.get("images", {}) or {}
            if not isinstance(images, dict):
                raise ValidationError("transition images must be a mapping")
            parsed = {}
            for var, lit in images.items():
                parsed[var] = _scalar(ctx, lit, "transition %s->%s image of %s"
                                      % (src, dst, var))
            try:
                transitions[key] = ChartMap(ctx, ctx, parsed)
            except RingError as exc:
                raise ValidationError("transition %s->%s: %s" % (src, dst, exc))

        for (i, j) in [t for t in nerve if len(t) == 2]:
            for key in ((i, j), (j, i)):
                transitions.setdefault(key, ChartMap.identity(ctx))
        try:
            return CoverSpec(ctx, names, transitions, nerve)
        except (RingError, ValueError) as exc:
            raise ValidationError(str(exc))

    def bundle(self) -> BundleCocycle:
        return self._memo("bundle", self._build_bundle)

    def _build_bundle(self):
        spec = self.data.get("bundle")
        if spec is None:
            raise ValidationError("this run needs a bundle field")
        cover = self.cover()
        if spec == "cotangent":
            return cotangent_bundle(cover)
        if not isinstance(spec, dict) or "rank" not in spec or "cocycle" not in spec:
            raise ValidationError("bundle must be 'cotangent' or a rank/cocycle mapping")
        rank = spec["rank"]
        if not isinstance(rank, int) or isinstance(rank, bool) or rank < 1:
            raise ValidationError("bundle rank must be a positive integer")
        ctx = cover.context
        index = {name: k for k, name in enumerate(self.chart_names())}
        mats = {}
        for entry in spec["cocycle"]:
            if not isinstance(entry, dict) or "pair" not in entry or "rows" not in entry:
                raise ValidationError("bundle cocycle entries need pair/rows fields")
            pair_names = _string_list(entry["pair"], "bundle pair")
            if len(pair_names) != 2 or any(n not in index for n in pair_names):
                raise ValidationError("bundle pair %r must name two charts" % (entry["pair"],))
            pair = (index[pair_names[0]], index[pair_names[1]])
            if pair[0] >= pair[1]:
                raise ValidationError("bundle pair %r must be in chart order" % (entry["pair"],))
            if pair in mats:
                raise ValidationError("duplicate bundle matrix for %r" % (entry["pair"],))
            rows = entry["rows"]
            if not isinstance(rows, list) or len(rows) != rank or \
                    any(not isinstance(r, list) or len(r) != rank for r in rows):
                raise ValidationError("bundle matrix for %r must be %dx%d"
                                      % (entry["pair"], rank, rank))
            grid = [[_scalar(ctx, cell, "bundle matrix %r" % (entry["pair"],))
                     for cell in row] for row in rows]
            mats[pair] = MatrixForm.from_scalars(ctx, grid)
        try:
            return BundleCocycle(cover, rank, mats)
        except RingError as exc:
            raise ValidationError(str(exc))

    def connections(self):
        """Per-chart connections plus transported differences A_{ij}."""
        return self._memo("connections", self._build_connections)

    def _build_connections(self):
        cover = self.cover()
        bundle = self.bundle()
        spec = self.data.get("connections", "flat")
        if spec == "flat":
            seed = "flat"
        else:
            if not isinstance(spec, dict):
                raise ValidationError("connections must be 'flat' or a chart mapping")
            ctx = cover.context
            index = {name: k for k, name in enumerate(self.chart_names())}
            chart = AtiyahChart(ctx, bundle.rank)
            seed = {}
            for name, rows in spec.items():
                if name not in index:
                    raise ValidationError("connections name unknown chart %r" % (name,))
                if not isinstance(rows, list) or len(rows) != bundle.rank or \
                        any(not isinstance(r, list) or len(r) != bundle.rank for r in rows):
                    raise ValidationError("connection for chart %r must be a %dx%d "
                                          "matrix of 1-form literals"
                                          % (name, bundle.rank, bundle.rank))
                cells = [[_literal(cell, "connection for chart %r" % (name,))
                          for cell in row] for row in rows]
                try:
                    omega = parse_matrix_form(ctx, cells, 1)
                except ExpressionSyntaxError as exc:
                    raise ParseError("connection for chart %r: %s" % (name, exc))
                except (RingError, ValueError) as exc:
                    raise ValidationError("connection for chart %r: %s" % (name, exc))
                seed[index[name]] = Connection(chart, omega)
        try:
            return induced_connections(cover, bundle, seed=seed)
        except RingError as exc:
            raise ValidationError(str(exc))

    def frames(self):
        return self._memo("frames", self._build_frames)

    def _build_frames(self):
        cover = self.cover()
        ctx = cover.context
        n = len(ctx.variables)
        index = {name: k for k, name in enumerate(self.chart_names())}
        spec = self.data.get("frames") or {}
        if not isinstance(spec, dict):
            raise ValidationError("frames must be a chart mapping")
        for name in spec:
            if name not in index:
                raise ValidationError("frames name unknown chart %r" % (name,))
        coordinate = [VectorField.basis(ctx, k) for k in range(n)]
        frames = {}
        for name, k in index.items():
            entry = spec.get(name, "coordinate")
            if entry == "coordinate":
                frames[k] = FrameEVA(ctx, list(coordinate))
                continue
            if not isinstance(entry, list) or len(entry) != n or \
                    any(not isinstance(r, list) or len(r) != n for r in entry):
                raise ValidationError("frame for chart %r must be 'coordinate' or "
                                      "an %dx%d component grid" % (name, n, n))
            fields = [VectorField(ctx, [_scalar(ctx, cell, "frame for chart %r" % (name,))
                                        for cell in row]) for row in entry]
            try:
                frames[k] = FrameEVA(ctx, fields)
            except ValueError as exc:
                raise ValidationError("frame for chart %r: %s" % (name, exc))
        return frames

    def primitives(self):
        return self._memo("primitives", self._build_primitives)

    def _build_primitives(self):
        spec = self.data.get("primitives")
        if spec is None:
            return None
        if not isinstance(spec, dict):
            raise ValidationError("primitives must be a chart mapping")
        cover = self.cover()
        ctx = cover.context
        half = ctx.const(Fraction(1, 2))
        index = {name: k for k, name in enumerate(self.chart_names())}
        conns, _ = self.connections()
        out = {}
        for name, k in index.items():
            if name not in spec:
                raise ValidationError("primitives must cover every chart; %r missing"
                                      % (name,))
            c = curvature(conns[k])
            target = mat_wedge_pair(c, c) * half
            entry = spec[name]
            if entry == "auto":
                out[k] = poincare_primitive(target)
                continue
            h = _form(ctx, entry, "primitive for chart %r" % (name,), degree=3)
            if ext_d(h) != target:
                raise ValidationError("primitive for chart %r does not "
                                      "differentiate to half the curvature "
                                      "self-pairing" % (name,))
            out[k] = h
        return out

    # ------------------------------------------------------------- preflight

    def preflight(self):
        """Build everything the declared tasks need, surfacing manifest
        problems before any task output is produced."""
        for task in self.tasks:
            if task == "verify-lemmas":
                continue
            self.context()
            if task == "check-axioms":
                if self.data.get("bundle") is not None and "charts" in self.data:
                    self.bundle()
            elif task in ("pontryagin", "ch2"):
                self.cover()
                self.bundle()
                self.connections()
                self.primitives()
            elif task == "eva-class":
                self.cover()
                self.frames()
            elif task == "compare-classes":
                self.cover()
                self.bundle()
                self.connections()
                self.frames()
