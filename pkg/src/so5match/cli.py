"""Batch check runner.

    so5match --suite counts volumes --p 3
    so5match --suite all --output json --out reports.json

Every check becomes one flat report record; the process exits 0 when all
pass, 1 when any fails and 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import cmath
import json
import math
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from . import harmonic as hm
from . import orbital as orb
from .groups import CASES, coset_piece, random_kb1k, smith_valuations
from .orbital import CheckReport, make_report
from .padic import CharacterSpec, PrecisionError, Qp, is_prime, legendre
from .signs import resolve_case
from .symbolic import ClosedForm, QSqrtRational

SUITES = ("counts", "cosets", "volumes", "spherical", "whittaker", "transfer", "shells", "mellin", "matching")
REPORT_FIELDS = ("check_id", "params", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err", "cells", "stable", "status")

EXACT_R = 8
PAIRING_R = 6
SCAN_R = 3
TOL_CLOSED = 1e-8
TOL_FINE = 1e-10


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    p: int = 3
    theta: int | None = None  # None: smallest quadratic non-residue
    cases: tuple = CASES
    r_max: int = 2
    precision: int = 24
    seed: int = 0
    x_samples: int = 5
    coset_samples: int = 100
    output: str = "tsv"
    suite: tuple = ("all",)
    inject_fault: str | None = None

    def validate(self) -> "RunConfig":
        if self.p < 3 or not is_prime(self.p):
            raise ConfigError(f"p must be an odd prime, got {self.p}")
        if self.theta is None:
            self.theta = hm.default_theta(self.p)
        elif self.theta % self.p == 0 or legendre(self.theta, self.p) != -1:
            raise ConfigError(f"theta={self.theta} is not a quadratic non-residue unit mod {self.p}")
        if self.r_max < 0:
            raise ConfigError("r_max must be >= 0")
        if self.precision < 4 * self.r_max + 8:
            raise ConfigError(f"precision must be at least 4*r_max + 8 = {4 * self.r_max + 8}")
        bad = [c for c in self.cases if c not in CASES]
        if bad or not self.cases:
            raise ConfigError(f"cases must be drawn from {CASES}")
        if self.x_samples < 1 or self.coset_samples < 1:
            raise ConfigError("sample counts must be positive")
        if self.output not in ("tsv", "json"):
            raise ConfigError("output must be tsv or json")
        unknown = [s for s in self.suite if s not in SUITES + ("all",)]
        if unknown:
            raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")
        if self.inject_fault is not None and self.inject_fault not in SUITES:
            raise ConfigError(f"inject_fault must name a suite, got {self.inject_fault!r}")
        return self

    def selected(self) -> list:
        chosen = SUITES if "all" in self.suite else self.suite
        return [s for s in SUITES if s in chosen]


# ---------------------------------------------------------------------------

def _exact_report(check_id: str, params: dict, a, b, probe: complex) -> CheckReport:
    """Report for an exact identity between rationals or ClosedForms."""
    if isinstance(a, ClosedForm) or isinstance(b, ClosedForm):
        a = a if isinstance(a, ClosedForm) else ClosedForm.const(a, b.q)
        b = b if isinstance(b, ClosedForm) else ClosedForm.const(b, a.q)
        lhs, rhs = a(probe), b(probe)
    else:
        lhs, rhs = complex(a), complex(b)
    rep = make_report(check_id, params, lhs, rhs, 0.0)
    if a == b:
        rep.abs_err = 0.0
        rep.status = "pass"
    else:
        rep.abs_err = max(rep.abs_err, 1e-300)
        rep.status = "fail"
    return rep


def _failed(check_id: str, params: dict, exc: Exception) -> CheckReport:
    params = dict(params, error=f"{type(exc).__name__}: {exc}")
    return CheckReport(check_id, params, complex("nan"), complex("nan"), float("inf"), 0, False, 0.0)


class Runner:
    def __init__(self, config: RunConfig):
        self.cfg = config
        self.rng = random.Random(config.seed)
        self.reports: list = []
        self.tags = {}
        self.resolutions = {}

    # sample points
    def unit_X(self, k: int) -> list:
        return [cmath.exp(2j * math.pi * self.rng.random()) for _ in range(k)]

    def fault(self, suite: str, value):
        """Perturb a closed-form value when the fault hook targets this suite."""
        if self.cfg.inject_fault != suite:
            return value
        if isinstance(value, ClosedForm):
            return value + ClosedForm.monomial(1, Fraction(1, 7), value.q)
        return value + Fraction(1, 7) if isinstance(value, (int, Fraction)) else value + 1 / 7

    def add(self, rep: CheckReport):
        self.reports.append(rep)

    def guarded(self, check_id: str, params: dict, fn):
        try:
            rep = fn()
        except (PrecisionError, orb.UnstableIntegral, orb.BoundaryLeak, ArithmeticError, LookupError) as exc:
            rep = _failed(check_id, params, exc)
        self.add(rep)

    def tag(self, case: str) -> hm.CaseTag:
        if case not in self.tags:
            res = resolve_case(case, self.cfg.p, self.cfg.theta)
            self.resolutions[case] = res
            self.tags[case] = res.tag()
        return self.tags[case]

    # suites ---------------------------------------------------------------
    def counts(self):
        p = self.cfg.p
        q = p
        expected = {"z_eq_0": q * q - 1, "two_x1x3_plus_x2sq_eq_1": q * q + q,
                    "two_x1_1px3_plus_x2sq_eq_4theta": q * q - q, "x1_minus_half_x4sq_eq_0": q}
        for eq, want in expected.items():
            got = hm.count_fq(eq, p, self.cfg.theta)
            self.add(_exact_report(f"counts/{eq}", {"p": p}, got, self.fault("counts", want), 1))

    def cosets(self):
        p = self.cfg.p
        F = Qp(p, self.cfg.precision)
        lifts = hm.coset_lifts_cached(p, self.cfg.precision)
        target = (-1, 0, 0, 0, 1)
        for i in range(self.cfg.coset_samples):
            g = random_kb1k(F, self.rng)
            cid = f"cosets/sample{i:03d}"

            def run(g=g, cid=cid):
                found = coset_piece(g, F, lifts)
                sv = smith_valuations(g)
                piece = found[0][0] if len(found) == 1 else ",".join(f[0] for f in found) or "none"
                want = 1 if self.cfg.inject_fault != "cosets" else 2
                return make_report(cid, {"p": p, "piece": piece, "smith": list(sv)},
                                   len(found) if sv == target else -1, want, 0.0)
            self.guarded(cid, {"p": p}, run)

    def volumes(self):
        p, q = self.cfg.p, self.cfg.p
        for case in self.cfg.cases:
            tag = self.tag(case)
            s = tag.sign("volume")
            seeds = hm.lambda_from_scan(2, case, p, self.cfg.theta)
            rec = hm.lambda_recursion(EXACT_R, (q, *seeds))
            for r in range(EXACT_R + 1):
                closed = self.fault("volumes", hm.lambda_closed(r, q, s))
                self.add(_exact_report(f"volumes/{case}/closed_vs_recursion/r{r}", {"case": case, "r": r},
                                       closed, rec[r], 1))
            lam = hm.lambda_from_scan(SCAN_R + 2, case, p, self.cfg.theta)
            for r in range(SCAN_R + 1):
                lhs, rhs = hm.volume_balance(r, lam, case, p, self.cfg.theta)
                self.add(_exact_report(f"volumes/{case}/orbit_balance/r{r}", {"case": case, "r": r},
                                       lhs, rhs, 1))

    def spherical(self):
        p, q = self.cfg.p, self.cfg.p
        sat = hm.satake_f1(q)
        self.add(_exact_report("spherical/satake_from_cosets", {"p": p},
                               hm.satake_from_cosets(q), self.fault("spherical", sat), 1.3))
        for case in self.cfg.cases:
            tag = self.tag(case)
            T1 = hm.T1_formula(q, tag.sign("T1"))
            for r in range(EXACT_R + 1):
                closed = hm.T_closed(r, q, tag.sign("spherical"))
                if r == 1:
                    closed = self.fault("spherical", closed)
                self.add(_exact_report(f"spherical/{case}/closed_vs_recursion/r{r}", {"case": case, "r": r},
                                       closed, hm.T_recursion(r, q, T1), 1.3))
            T = [hm.T_closed(r, q, tag.sign("spherical")) for r in range(SCAN_R + 2)]
            xs = self.unit_X(self.cfg.x_samples)
            for r in range(SCAN_R + 1):
                hist = hm.scan_total(r, case, p, self.cfg.theta)
                for j, X0 in enumerate(xs):
                    lhs = sum(hist[i] * T[i](X0) for i in hist)
                    rhs = sat(X0) * T[r](X0)
                    self.add(make_report(f"spherical/{case}/eigen/r{r}/x{j}", {"case": case, "r": r, "X": repr(X0)},
                                         lhs, rhs, TOL_FINE * max(1.0, abs(rhs))))

    def whittaker(self):
        q = self.cfg.p
        X = ClosedForm.X(q)
        Xi = ClosedForm.monomial(-1, 1, q)
        expect = {0: ClosedForm.const(1, q),
                  1: (X + Xi) * (-QSqrtRational.q_power(-1, q)),
                  2: (X * X + 1 + Xi * Xi) * Fraction(1, q)}
        for r, want in expect.items():
            self.add(_exact_report(f"whittaker/W/r{r}", {"r": r}, hm.whittaker_W(r, q),
                                   self.fault("whittaker", want), 1.3))
        # the spherical Hecke operator of PGL(2) acts on W by q^{1/2}(X + 1/X):
        # -q W_{r+1} - W_{r-1} = q^{1/2}(X + 1/X) W_r
        lam = (X + Xi) * QSqrtRational.q_power(1, q)
        for r in range(EXACT_R + 1):
            lhs = hm.whittaker_W(r + 1, q) * (-q) - hm.whittaker_W(r - 1, q)
            self.add(_exact_report(f"whittaker/hecke/r{r}", {"r": r}, lhs, lam * hm.whittaker_W(r, q), 1.3))
        for case in self.cfg.cases:
            tag = self.tag(case)
            for r in range(PAIRING_R + 1):
                P = hm.pairing_closed(r, q, tag.sign("pairing"))
                self.add(_exact_report(f"whittaker/{case}/pairing_symmetry/r{r}", {"case": case, "r": r},
                                       P, P.substitute_inverse(), 1.3))

    def transfer(self):
        p, q = self.cfg.p, self.cfg.p
        for case in self.cfg.cases:
            tag = self.tag(case)
            T = list(hm.T_from_scan(min(PAIRING_R, SCAN_R + 1), case, p, self.cfg.theta))
            T += [hm.T_closed(r, q, tag.sign("spherical")) for r in range(len(T), PAIRING_R + 1)]
            lam = [hm.lambda_vol(r, tag) for r in range(PAIRING_R + 1)]
            for r in range(PAIRING_R + 1):
                direct = hm.pairing_sum(r, T, lam, q)
                closed = self.fault("transfer", hm.pairing_closed(r, q, tag.sign("pairing")))
                self.add(_exact_report(f"transfer/{case}/pairing/r{r}", {"case": case, "r": r}, direct, closed, 1.3))
                coeffs = hm.transfer_coefficients(r, q, tag.sign("transfer"))
                rhs = sum((hm.whittaker_pairing(k, q) * c for k, c in coeffs.items()), ClosedForm({}, q))
                self.add(_exact_report(f"transfer/{case}/identity/r{r}",
                                       {"case": case, "r": r, "coefficients": {str(k): c for k, c in coeffs.items()}},
                                       direct, rhs, 1.3))

    def shells(self):
        p, q = self.cfg.p, self.cfg.p
        F = Qp(p)
        chi0 = CharacterSpec(p)
        for w in (3, 1):
            for vx in (2, 0, -2):
                x = F.pi_power(vx)
                for k in range(-4, 5):
                    cid = f"shells/unramified/w{w}/vx{vx}/k{k}"
                    got = orb.shell_integral(k, x, chi0, w)
                    want = self.fault("shells", orb.lemma_shell_closed(k, vx, w, q))
                    self.add(_exact_report(cid, {"w": w, "vx": vx, "k": k}, got, want, 1.3))
        for m in (1, 2):
            chi = CharacterSpec(p, m, 1, cmath.exp(0.4j))
            for k in range(-2, 5):
                if k == m:
                    continue
                val = orb.shell_integral(k, F(1), chi, 1)
                self.add(make_report(f"shells/ramified/m{m}/k{k}", {"m": m, "k": k}, val, 0, 1e-12))
            tau = orb.gauss_tau(chi)
            order = p ** (m - 1) * (p - 1)
            self.add(make_report(f"shells/gauss_tau_size/m{m}", {"m": m}, abs(tau) * order, p ** (m / 2), 1e-12))

    def mellin(self):
        p, q = self.cfg.p, self.cfg.p
        rH = max(4, self.cfg.r_max)
        chi0 = CharacterSpec(p)
        ramified = [CharacterSpec(p, m, 1, cmath.exp(0.4j)) for m in (1, 2)]
        for case in self.cfg.cases:
            tag = self.tag(case)
            s = tag.sign("mellin_h")
            xs = self.unit_X(self.cfg.x_samples)
            for r in range(rH + 1):
                for j, X0 in enumerate(xs):
                    cid = f"mellin/{case}/H_unramified/r{r}/x{j}"
                    prm = {"case": case, "r": r, "X": repr(X0)}

                    def run(r=r, X0=X0, cid=cid, prm=prm):
                        ev = orb.mellin_H_eval(r, chi0, tag, X0)
                        want = self.fault("mellin", orb.mellin_H_closed(r, q, s, X0))
                        return make_report(cid, prm, ev.value, want, 1e-9, ev.cells, ev.stable)
                    self.guarded(cid, prm, run)
            for r in range(1, rH + 1):
                for j, X0 in enumerate(xs):
                    cid = f"mellin/{case}/H_combination/r{r}/x{j}"
                    prm = {"case": case, "r": r, "X": repr(X0)}

                    def run(r=r, X0=X0, cid=cid, prm=prm):
                        ev = orb.mellin_H_combination(r, chi0, tag, X0)
                        want = orb.mellin_combination_closed(r, q, tag.sign("combination"), X0)
                        return make_report(cid, prm, ev.value, want, 1e-9, ev.cells, ev.stable)
                    self.guarded(cid, prm, run)
            for chi in ramified:
                for r in range(rH + 1):
                    for label, formula in (("stated", lambda r=r, chi=chi: orb.mellin_H_ramified_stated(r, chi)),
                                           ("corrected", lambda r=r, chi=chi: orb.mellin_H_ramified_corrected(r, chi, case))):
                        cid = f"mellin/{case}/H_ramified_{label}/m{chi.conductor}/r{r}"
                        prm = {"case": case, "r": r, "m": chi.conductor}

                        def run(r=r, chi=chi, cid=cid, prm=prm, formula=formula):
                            ev = orb.mellin_H_eval(r, chi, tag)
                            return make_report(cid, prm, ev.value, formula(), 1e-9, ev.cells, ev.stable)
                        self.guarded(cid, prm, run)
            xg = xs[:3]
            for r in range(1, max(2, self.cfg.r_max) + 1):
                for j, X0 in enumerate(xg):
                    cid = f"mellin/{case}/G_unramified/r{r}/x{j}"
                    prm = {"case": case, "r": r, "X": repr(X0)}

                    def run(r=r, X0=X0, cid=cid, prm=prm):
                        ev = orb.mellin_G_eval(r, chi0, tag, X0)
                        return make_report(cid, prm, ev.value, orb.mellin_G_closed(r, q, case, X0), TOL_CLOSED,
                                           ev.cells, ev.stable)
                    self.guarded(cid, prm, run)
                for chi in ramified:
                    cid = f"mellin/{case}/G_ramified/m{chi.conductor}/r{r}"
                    prm = {"case": case, "r": r, "m": chi.conductor}

                    def run(r=r, chi=chi, cid=cid, prm=prm):
                        ev = orb.mellin_G_eval(r, chi, tag)
                        return make_report(cid, prm, ev.value, 0, 1e-9, ev.cells, ev.stable)
                    self.guarded(cid, prm, run)

    def matching(self):
        p = self.cfg.p
        F = Qp(p, self.cfg.precision)
        units = (1, self.cfg.theta)
        for case in self.cfg.cases:
            tag = self.tag(case)
            for r in range(self.cfg.r_max + 1):
                for v in range(-2, 3):
                    for u in units:
                        alpha = F(u * Fraction(p) ** v)
                        cid = f"matching/{case}/r{r}/v{v}/u{u}"
                        prm = {"case": case, "r": r, "v": v, "u": u}

                        def run(alpha=alpha, r=r, cid=cid, prm=prm):
                            lhs, rhs, cells = orb.matching_sides(alpha, r, tag)
                            if self.cfg.inject_fault == "matching":
                                rhs = rhs + 1 / 7
                            return make_report(cid, prm, lhs, rhs, 1e-6, cells, True)
                        self.guarded(cid, prm, run)

    def run(self) -> list:
        for name in self.cfg.selected():
            getattr(self, name)()
        return self.reports

    def header(self) -> dict:
        for case in self.cfg.cases:
            self.tag(case)
        return {
            "p": self.cfg.p,
            "theta": self.cfg.theta,
            "resolved_signs": {c: dict(self.resolutions[c].signs) for c in self.cfg.cases},
            "sign_conflicts_with_stated": {c: {k: list(v) for k, v in self.resolutions[c].conflicts().items()}
                                           for c in self.cfg.cases},
            "version": __version__,
        }


def run_suite(config: RunConfig) -> tuple:
    """Run the selected suites; returns (header, reports, exit_status)."""
    config.validate()
    runner = Runner(config)
    reports = runner.run()
    status = 0 if all(r.passed for r in reports) else 1
    return runner.header(), reports, status


# ---------------------------------------------------------------------------
# serialization

def _num(x: float):
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return x


def report_record(rep: CheckReport) -> dict:
    return {
        "check_id": rep.check_id,
        "params": rep.params,
        "lhs_re": _num(rep.lhs.real), "lhs_im": _num(rep.lhs.imag),
        "rhs_re": _num(rep.rhs.real), "rhs_im": _num(rep.rhs.imag),
        "abs_err": _num(rep.abs_err),
        "cells": rep.cells,
        "stable": rep.stable,
        "status": rep.status,
    }


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return repr(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render(header: dict, reports: list, fmt: str) -> str:
    records = [report_record(r) for r in reports]
    if fmt == "json":
        return json.dumps([header] + records, indent=1, default=_jsonable) + "\n"
    lines = ["# " + json.dumps(header, sort_keys=True, default=_jsonable), "\t".join(REPORT_FIELDS)]
    for rec in records:
        row = []
        for k in REPORT_FIELDS:
            v = rec[k]
            if k == "params":
                v = json.dumps(v, sort_keys=True, default=_jsonable)
            row.append(repr(v) if isinstance(v, float) else str(v))
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="so5match", description="Run the orbital-integral matching checks.")
    d = RunConfig()
    ap.add_argument("--p", type=int, default=d.p, help="odd prime (default 3)")
    ap.add_argument("--theta", default="auto", help="'auto' or an explicit non-residue unit")
    ap.add_argument("--cases", nargs="+", default=list(d.cases), choices=list(CASES))
    ap.add_argument("--r-max", type=int, default=d.r_max)
    ap.add_argument("--precision", type=int, default=d.precision)
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--x-samples", type=int, default=d.x_samples)
    ap.add_argument("--coset-samples", type=int, default=d.coset_samples)
    ap.add_argument("--output", choices=("tsv", "json"), default=d.output)
    ap.add_argument("--suite", nargs="+", default=list(d.suite), help=f"any of {', '.join(SUITES)} or all")
    ap.add_argument("--out", default="-", help="output file (default stdout)")
    ap.add_argument("--inject-fault", default=None, metavar="SUITE",
                    help="perturb a closed-form value in SUITE (test hook)")
    ap.add_argument("--summary", action="store_true", help="print pass/fail counts to stderr")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.theta == "auto":
        theta = None
    else:
        try:
            theta = int(ns.theta)
        except ValueError:
            raise ConfigError(f"theta must be 'auto' or an integer, got {ns.theta!r}") from None
    return RunConfig(p=ns.p, theta=theta, cases=tuple(ns.cases), r_max=ns.r_max, precision=ns.precision,
                     seed=ns.seed, x_samples=ns.x_samples, coset_samples=ns.coset_samples, output=ns.output,
                     suite=tuple(ns.suite), inject_fault=ns.inject_fault)


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = config_from_args(ns).validate()
    except ConfigError as exc:
        print(f"so5match: configuration error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    header, reports, status = run_suite(cfg)
    text = render(header, reports, cfg.output)
    if ns.out == "-":
        sys.stdout.write(text)
    else:
        with open(ns.out, "w") as fh:
            fh.write(text)
    if ns.summary:
        failed = [r.check_id for r in reports if not r.passed]
        print(f"{len(reports) - len(failed)}/{len(reports)} passed in {time.perf_counter() - t0:.1f}s",
              file=sys.stderr)
        for cid in failed:
            print(f"  FAIL {cid}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
