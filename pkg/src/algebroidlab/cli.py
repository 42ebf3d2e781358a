"""Command-line runner: execute the tasks a manifest declares.

Exit codes: 0 when every task passed, 1 when a task ran and failed (the
report is still produced), 2 when the manifest itself cannot be parsed or
validated.  Reports are deterministic for a fixed (manifest, seed,
version); the machine rendering is byte-stable and the result cache can
never change outcomes because its keys hash all inputs that matter.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from . import __version__
from .cache import ResultCache, cache_key, resolve_cache_dir
from .cartan import form_to_literal
from .cech import (
    NoSolutionWithinBound,
    ch2_cocycle,
    closure_report,
    compare_classes,
    eva_class_cocycle,
    hat_P_assembly,
    hat_P_closed_total,
    pontryagin_cocycle,
)
from .checks import CheckReport
from .courant import check_courant_axioms
from .lemmas import (
    admissible_structure,
    rand_element,
    rand_poly,
    subseed,
    verify_lemmas,
)
from .manifest import Manifest, ParseError, ValidationError
from .report import Report


def _cochain_payload(total) -> dict:
    out = {}
    for (p, q), cochain in sorted(total.components.items()):
        block = {}
        for simplex in sorted(cochain.values):
            key = ",".join(str(i) for i in simplex)
            block[key] = form_to_literal(cochain.values[simplex])
        out["%d,%d" % (p, q)] = block
    return out


def _task_check_axioms(man, seed, samples, degree_bound, parallel):
    ctx = man.context()
    rank = 2
    bundle_spec = man.data.get("bundle")
    if isinstance(bundle_spec, dict) and isinstance(bundle_spec.get("rank"), int):
        rank = bundle_spec["rank"]
    rng = random.Random(seed)
    s = admissible_structure(rng, ctx, rank)
    elems = [rand_element(rng, s) for _ in range(samples)]
    funcs = [rand_poly(rng, ctx) for _ in range(4)]
    report = check_courant_axioms(s, elems, funcs)
    payload = {"rank": rank, "elements": len(elems), "admissible": s.admissible}
    return report, payload


def _task_pontryagin(man, seed, samples, degree_bound, parallel, half=False):
    cover = man.cover()
    bundle = man.bundle()
    conns, _ = man.connections()
    maker = ch2_cocycle if half else pontryagin_cocycle
    total = maker(cover, bundle, conns)
    report = closure_report(total)
    payload = {"cocycle": _cochain_payload(total)}
    primitives = man.primitives()
    if primitives is not None:
        hatp, hat_report = hat_P_assembly(cover, bundle, conns, primitives)
        report.merge(hat_report, prefix="corrected-")
        closed = hat_P_closed_total(hatp, cover)
        report.merge(closure_report(closed), prefix="corrected-total-")
        payload["corrected"] = _cochain_payload(closed)
    return report, payload


def _task_ch2(man, seed, samples, degree_bound, parallel):
    return _task_pontryagin(man, seed, samples, degree_bound, parallel, half=True)


def _task_eva_class(man, seed, samples, degree_bound, parallel):
    cover = man.cover()
    total, report = eva_class_cocycle(cover, man.frames())
    payload = {"cocycle": _cochain_payload(total), "vanishes": total.is_zero()}
    return report, payload


def _task_compare_classes(man, seed, samples, degree_bound, parallel):
    cover = man.cover()
    bundle = man.bundle()
    conns, _ = man.connections()
    eva_total, eva_report = eva_class_cocycle(cover, man.frames())
    ch2 = ch2_cocycle(cover, bundle, conns)
    report = CheckReport()
    report.merge(eva_report, prefix="eva-")
    report.merge(closure_report(ch2), prefix="ch2-")
    payload = {"eva": _cochain_payload(eva_total), "ch2": _cochain_payload(ch2)}
    try:
        orientation, primitive = compare_classes(cover, eva_total, ch2,
                                                 degree_bound=degree_bound)
    except NoSolutionWithinBound as exc:
        report.add("cohomologous", False, str(exc))
        payload["orientation"] = None
        return report, payload
    report.add("cohomologous", True)
    payload["orientation"] = orientation
    payload["primitive"] = _cochain_payload(primitive)
    return report, payload


def _task_verify_lemmas(man, seed, samples, degree_bound, parallel):
    report = verify_lemmas(seed=seed, samples=samples, parallel=parallel)
    suites = sorted({row.name.split("/")[0] for row in report.rows})
    return report, {"suites": suites}


TASK_RUNNERS = {
    "check-axioms": _task_check_axioms,
    "pontryagin": _task_pontryagin,
    "ch2": _task_ch2,
    "eva-class": _task_eva_class,
    "compare-classes": _task_compare_classes,
    "verify-lemmas": _task_verify_lemmas,
}


def run_manifest(man: Manifest, seed=None, degree_bound=None, samples=None,
                 parallel=False, cache_dir=None, use_cache=True) -> Report:
    """Run every declared task; manifest problems raise before any runs."""
    eff_seed = man.seed if seed is None else seed
    eff_bound = man.degree_bound if degree_bound is None else degree_bound
    eff_samples = man.samples if samples is None else samples
    man.preflight()
    cache = ResultCache(resolve_cache_dir(cache_dir)) if use_cache else None
    out = Report(man.sha256, eff_seed, __version__)
    for task in man.tasks:
        key = cache_key({
            "task": task,
            "manifest": man.sha256,
            "seed": eff_seed,
            "degree_bound": eff_bound,
            "samples": eff_samples,
            "version": __version__,
        })
        cached = cache.get(key) if cache else None
        if cached is not None and cached.get("name") == task:
            out.add_cached(cached)
            continue
        started = time.monotonic()
        report, payload = TASK_RUNNERS[task](
            man, subseed(eff_seed, task), eff_samples, eff_bound, parallel)
        out.add_task(task, report=report, payload=payload,
                     elapsed=time.monotonic() - started)
        if cache:
            cache.put(key, out.task_entry())
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="algebroidlab",
        description="Exact verification runs over chart-level manifests.")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run the tasks a manifest declares")
    runp.add_argument("manifest", help="path to the manifest file")
    runp.add_argument("--seed", type=int, default=None,
                      help="override the manifest seed")
    runp.add_argument("--degree-bound", type=int, default=None,
                      help="override the manifest coboundary degree bound")
    runp.add_argument("--samples", type=int, default=None,
                      help="override the manifest sample count")
    runp.add_argument("--parallel", action="store_true",
                      help="run lemma sub-suites on a thread pool")
    runp.add_argument("--cache-dir", default=None,
                      help="result cache directory (defaults to env or project-local)")
    runp.add_argument("--no-cache", action="store_true",
                      help="skip the result cache entirely")
    runp.add_argument("--out", default=None,
                      help="also write the machine report to this path")
    runp.add_argument("--format", choices=("text", "machine"), default="text",
                      help="stdout rendering")
    args = parser.parse_args(argv)

    try:
        man = Manifest.load(args.manifest)
        report = run_manifest(man, seed=args.seed, degree_bound=args.degree_bound,
                              samples=args.samples, parallel=args.parallel,
                              cache_dir=args.cache_dir,
                              use_cache=not args.no_cache)
    except ParseError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return 2
    except ValidationError as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return 2

    rendered = report.to_machine() if args.format == "machine" else report.to_text()
    sys.stdout.write(rendered)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(report.to_machine())
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
