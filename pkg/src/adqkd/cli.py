"""Command-line experiment runner: ``adqkd rates|verify|shots|sweep-beta``.

Experiments are described by an INI-style config file with named sections
of ``key = value`` pairs; every key also has a command-line override flag
of the same name (underscores become dashes). Unknown sections or keys
are hard errors. Exit codes: 0 success, 1 verification failure, 2 config
error.

Sections and keys (defaults in parentheses):

  [protocol] protocol (bb84|b92|bbm92|dualrail-bb84), noise (ad|gad),
             gamma (0), p (1), delta (0), pair (correlated),
             distribution (charlie-midpoint), scheme (ancilla|optimal),
             fault_site (none), beta (0), l_sift (32768)
  [sweep]    parameter (gamma), start, stop, points, p_start, p_stop,
             p_points -- gamma sweeps default to 101 points on [0, 1]
             (21x21 for (gamma, p) grids), beta sweeps to 41 on [0, 0.2]
  [shots]    shots_per_block (8192), n_gates_start (0), n_gates_stop
             (2000), n_gates_points (9), seed (12345), profile
             (yorktown), qubits (per-protocol default), mode
             (block|random), readout_override (unset)
  [output]   path

Every CSV row is reproducible from the config and seed alone; the
resolved config is echoed to a ``<out>.cfg`` sidecar, and floats are
written with 12 significant digits.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dualrail, montecarlo, protocols, sampling
from .noise import AdParams, GadParams

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2

# closed-form operations that `adqkd verify` must exercise, by identifier
CLOSED_FORM_OPERATIONS = frozenset(
    {
        "protocols.bb84_rates_ad",
        "protocols.bb84_rates_gad",
        "protocols.b92_rates",
        "protocols.bbm92_rates",
        "dualrail.table1_rates",
        "dualrail.gad_encoded_rates",
    }
)


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


def _parse_choice(*choices):
    def parse(raw):
        value = raw.strip().lower()
        if value not in choices:
            raise ConfigError(f"expected one of {choices}, got {raw!r}")
        return value

    return parse


def _parse_prob(raw):
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f"not a number: {raw!r}") from exc
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"probability {value!r} outside [0, 1]")
    return value


def _parse_float(raw):
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"not a number: {raw!r}") from exc


def _parse_int(minimum):
    def parse(raw):
        try:
            value = int(raw, 0)
        except ValueError as exc:
            raise ConfigError(f"not an integer: {raw!r}") from exc
        if value < minimum:
            raise ConfigError(f"integer {value} below minimum {minimum}")
        return value

    return parse


def _parse_qubits(raw):
    try:
        qubits = tuple(int(tok) for tok in str(raw).split(","))
    except ValueError as exc:
        raise ConfigError(f"qubits must be comma-separated integers: {raw!r}") from exc
    if not qubits or any(q < 0 for q in qubits):
        raise ConfigError(f"bad qubit list {raw!r}")
    return qubits


def _parse_str(raw):
    return str(raw).strip()


PROTO_DUALRAIL = "dualrail-bb84"

_SCHEMA = {
    "protocol": {
        "protocol": (_parse_choice("bb84", "b92", "bbm92", PROTO_DUALRAIL), "bb84"),
        "noise": (_parse_choice("ad", "gad"), "ad"),
        "gamma": (_parse_prob, 0.0),
        "p": (_parse_prob, 1.0),
        "delta": (_parse_prob, 0.0),
        "pair": (_parse_choice(protocols.CORRELATED, protocols.ANTI_CORRELATED), protocols.CORRELATED),
        "distribution": (
            _parse_choice(protocols.CHARLIE_MIDPOINT, protocols.ALICE_SENDS),
            protocols.CHARLIE_MIDPOINT,
        ),
        "scheme": (_parse_choice(dualrail.ANCILLA, dualrail.OPTIMAL), dualrail.ANCILLA),
        "fault_site": (
            _parse_choice(
                dualrail.SITE_NONE,
                dualrail.SITE_ENCODER,
                dualrail.SITE_POST_SELECTION,
                dualrail.SITE_DECODER,
            ),
            dualrail.SITE_NONE,
        ),
        "beta": (_parse_prob, 0.0),
        "l_sift": (_parse_int(0), 32768),
    },
    "sweep": {
        "parameter": (_parse_choice("gamma", "beta"), "gamma"),
        "start": (_parse_float, 0.0),
        "stop": (_parse_float, 1.0),
        "points": (_parse_int(1), 101),
        "p_start": (_parse_prob, 0.0),
        "p_stop": (_parse_prob, 1.0),
        "p_points": (_parse_int(1), 21),
    },
    "shots": {
        "shots_per_block": (_parse_int(1), 8192),
        "n_gates_start": (_parse_int(0), 0),
        "n_gates_stop": (_parse_int(0), 2000),
        "n_gates_points": (_parse_int(1), 9),
        "seed": (_parse_int(0), 12345),
        "profile": (_parse_str, "yorktown"),
        "qubits": (_parse_qubits, None),
        "mode": (_parse_choice(montecarlo.BLOCK_MODE, montecarlo.RANDOM_MODE), montecarlo.BLOCK_MODE),
        "readout_override": (_parse_prob, None),
    },
    "output": {
        "path": (_parse_str, None),
    },
}

# (flag, section, key); the spec-level flags --out/--seed/--profile/--points
# are the output.path / shots.seed / shots.profile / sweep.points overrides
_OVERRIDE_FLAGS = [("--out", "output", "path")] + [
    (f"--{key.replace('_', '-')}", section, key)
    for section, keys in _SCHEMA.items()
    for key in keys
    if (section, key) != ("output", "path")
]


@dataclass
class Experiment:
    """Fully resolved configuration plus which keys were set explicitly."""

    values: dict = field(default_factory=dict)
    explicit: set = field(default_factory=set)

    def get(self, section, key):
        return self.values[(section, key)]

    def was_set(self, section, key):
        return (section, key) in self.explicit

    def echo_ini(self) -> str:
        lines = []
        for section in _SCHEMA:
            lines.append(f"[{section}]")
            for key in _SCHEMA[section]:
                value = self.values[(section, key)]
                if value is None:
                    continue
                if isinstance(value, tuple):
                    value = ",".join(str(v) for v in value)
                lines.append(f"{key} = {value}")
            lines.append("")
        return "\n".join(lines)


def load_experiment(config_path, overrides) -> Experiment:
    """Defaults -> config file -> command-line overrides, all schema-checked."""
    exp = Experiment()
    for section, keys in _SCHEMA.items():
        for key, (_, default) in keys.items():
            exp.values[(section, key)] = default
    if config_path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path!r}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {config_path!r}: {exc}") from exc
        for section in parser.sections():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in _SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                parse, _ = _SCHEMA[section][key]
                exp.values[(section, key)] = parse(raw)
                exp.explicit.add((section, key))
    for (section, key), raw in overrides.items():
        parse, _ = _SCHEMA[section][key]
        exp.values[(section, key)] = parse(raw)
        exp.explicit.add((section, key))
    return exp


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path, header, rows, comments=()):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for comment in comments:
                fh.write(f"# {comment}\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write output {path!r}: {exc}") from exc


def _write_sidecar(path, exp: Experiment, command: str):
    try:
        with open(path + ".cfg", "w", encoding="utf-8") as fh:
            fh.write(f"# adqkd {command} provenance echo\n")
            fh.write(exp.echo_ini())
    except OSError as exc:
        raise ConfigError(f"cannot write sidecar for {path!r}: {exc}") from exc


def _require_out(exp) -> str:
    path = exp.get("output", "path")
    if not path:
        raise ConfigError("an output path is required (config [output] path or --out)")
    return path


def _pmap(fn, items):
    """Map over grid points on a worker pool, preserving input order."""
    items = list(items)
    if len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(8, len(items))) as pool:
        return list(pool.map(fn, items))


def _grid(start, stop, points):
    if points == 1:
        return [float(start)]
    if stop < start:
        raise ConfigError(f"sweep stop {stop} below start {start}")
    return [float(v) for v in np.linspace(start, stop, points)]


def _protocol_rates(exp, gamma, p):
    """(rates, provenance) at one grid point from the closed forms."""
    name = exp.get("protocol", "protocol")
    noise_kind = exp.get("protocol", "noise")
    delta = exp.get("protocol", "delta")
    if name == PROTO_DUALRAIL:
        if exp.get("protocol", "fault_site") != dualrail.SITE_NONE:
            raise ConfigError("rates sweeps cover the fault-free encoded protocol; use sweep-beta for faults")
        if noise_kind == "gad":
            return dualrail.gad_encoded_rates(GadParams(gamma, p))
        return protocols.ErrorRates(0.0, 0.0, 1.0 - gamma)
    noise = GadParams(gamma, p) if noise_kind == "gad" else AdParams(gamma)
    cfg = protocols.ProtocolConfig(
        protocol=name,
        noise=noise,
        readout_delta=delta,
        bbm92_pair=exp.get("protocol", "pair") if name == protocols.BBM92 else None,
        bbm92_distribution=exp.get("protocol", "distribution") if name == protocols.BBM92 else None,
    )
    return protocols.analytic_rates(cfg)


def cmd_rates(exp: Experiment) -> int:
    """Analytic sweep of the damping probability (or a (gamma, p) grid for GAD).

    CSV columns: gamma[,p],e_b,e_p,sift,secure_fraction,l_sec,provenance.
    """
    out = _require_out(exp)
    if exp.get("sweep", "parameter") != "gamma":
        raise ConfigError("rates sweeps gamma; set [sweep] parameter = gamma")
    name = exp.get("protocol", "protocol")
    noise_kind = exp.get("protocol", "noise")
    if noise_kind == "gad" and name not in ("bb84", PROTO_DUALRAIL):
        raise ConfigError(f"GAD rates are only derived for bb84 and {PROTO_DUALRAIL}")
    if name == protocols.BBM92 and exp.get("protocol", "delta") != 0.0:
        raise ConfigError("BBM92 closed-form rates require delta = 0")
    two_d = noise_kind == "gad"
    points = exp.get("sweep", "points")
    if two_d and not exp.was_set("sweep", "points"):
        points = 21  # default (gamma, p) grid is 21x21
    gammas = _grid(exp.get("sweep", "start"), exp.get("sweep", "stop"), points)
    if any(not 0.0 <= g <= 1.0 for g in gammas):
        raise ConfigError("gamma sweep bounds must stay inside [0, 1]")
    if two_d:
        ps = _grid(exp.get("sweep", "p_start"), exp.get("sweep", "p_stop"), exp.get("sweep", "p_points"))
        grid = [(g, p) for g in gammas for p in ps]
    else:
        grid = [(g, exp.get("protocol", "p")) for g in gammas]
    l_sift = exp.get("protocol", "l_sift")

    def one(point):
        g, p = point
        rates = _protocol_rates(exp, g, p)
        sf = protocols.secure_fraction(rates)
        l_sec = protocols.secure_length(l_sift, rates.e_b, rates.e_p)
        head = (g, p) if two_d else (g,)
        return head + (rates.e_b, rates.e_p, rates.sift, sf, l_sec, "analytic")

    rows = _pmap(one, grid)
    header = (["gamma", "p"] if two_d else ["gamma"]) + [
        "e_b", "e_p", "sift", "secure_fraction", "l_sec", "provenance",
    ]
    _write_csv(out, header, rows, comments=["command = rates", f"protocol = {name}"])
    _write_sidecar(out, exp, "rates")
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_sweep_beta(exp: Experiment) -> int:
    """Sweep the CNOT failure rate at fixed gamma, one curve per fault site.

    Runs the encoded protocol's density-matrix pipeline (ancilla layout) and
    emits conditional error rates plus both key-rate normalizations: with
    the survival prefactor (secure_fraction_sifted) and without it
    (secure_fraction_unsifted).

    CSV columns: beta,site,e_b,e_p,sift,secure_fraction_sifted,
    secure_fraction_unsifted.
    """
    out = _require_out(exp)
    if exp.get("protocol", "scheme") != dualrail.ANCILLA:
        raise ConfigError("sweep-beta analyses the ancilla layout (the optimal one has no decoder CNOT)")
    gamma = exp.get("protocol", "gamma") if exp.was_set("protocol", "gamma") else 0.5
    start = exp.get("sweep", "start") if exp.was_set("sweep", "start") else 0.0
    stop = exp.get("sweep", "stop") if exp.was_set("sweep", "stop") else 0.2
    points = exp.get("sweep", "points") if exp.was_set("sweep", "points") else 41
    if exp.was_set("sweep", "parameter") and exp.get("sweep", "parameter") != "beta":
        raise ConfigError("sweep-beta sweeps beta; set [sweep] parameter = beta")
    betas = _grid(start, stop, points)
    if any(not 0.0 <= b <= 1.0 for b in betas):
        raise ConfigError("beta sweep bounds must stay inside [0, 1]")
    sites = (dualrail.SITE_ENCODER, dualrail.SITE_POST_SELECTION, dualrail.SITE_DECODER)

    def one(point):
        site, beta = point
        fault = dualrail.FaultSite(site, beta)
        e_b_joint, e_p_joint, survival = dualrail.joint_error_rates(
            dualrail.ANCILLA, AdParams(gamma), fault
        )
        e_b = min(1.0, e_b_joint / survival) if survival > 0 else 0.0
        e_p = min(1.0, e_p_joint / survival) if survival > 0 else 0.0
        cost = 1.0 - protocols.binary_entropy(e_b) - protocols.binary_entropy(e_p)
        return (beta, site, e_b, e_p, survival, max(0.0, survival * cost), max(0.0, cost))

    rows = _pmap(one, [(site, beta) for site in sites for beta in betas])
    header = ["beta", "site", "e_b", "e_p", "sift", "secure_fraction_sifted", "secure_fraction_unsifted"]
    _write_csv(out, header, rows, comments=["command = sweep-beta", f"gamma = {_fmt(gamma)}"])
    _write_sidecar(exp=exp, path=out, command="sweep-beta")
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _shots_config(exp):
    """Build the (cfg, qubits) pair the shot simulator runs on."""
    name = exp.get("protocol", "protocol")
    noise_kind = exp.get("protocol", "noise")
    p = exp.get("protocol", "p")
    # gamma itself comes from the delay sweep; only the GAD mixing p carries over
    noise = GadParams(0.0, p) if noise_kind == "gad" else AdParams(0.0)
    if name == PROTO_DUALRAIL:
        fault = dualrail.FaultSite(exp.get("protocol", "fault_site"), exp.get("protocol", "beta"))
        cfg = dualrail.EncodedConfig(noise=noise, scheme=exp.get("protocol", "scheme"), fault=fault)
        default_qubits = (0, 1, 2) if cfg.scheme == dualrail.ANCILLA else (0, 1)
    elif name == protocols.BBM92:
        cfg = protocols.ProtocolConfig(
            protocol=name,
            noise=noise,
            bbm92_pair=exp.get("protocol", "pair"),
            bbm92_distribution=exp.get("protocol", "distribution"),
        )
        default_qubits = (0, 1)
    else:
        cfg = protocols.ProtocolConfig(protocol=name, noise=noise)
        default_qubits = (0,)
    qubits = exp.get("shots", "qubits") or default_qubits
    return cfg, qubits


def cmd_shots(exp: Experiment) -> int:
    """Seeded shot-level campaign over a sweep of idle-gate delays.

    CSV columns: n_identity_gates,gamma,qber,phase_error,l_sec; the seed
    and profile are recorded in header comment lines. Reruns with the same
    config and seed are byte-identical.
    """
    out = _require_out(exp)
    cfg, qubits = _shots_config(exp)
    profile = montecarlo.load_profile(exp.get("shots", "profile"))
    override = exp.get("shots", "readout_override")
    if override is not None:
        profile = profile.with_readout(override)
    seed = exp.get("shots", "seed")
    gate_grid = sorted(
        {
            int(round(v))
            for v in np.linspace(
                exp.get("shots", "n_gates_start"),
                exp.get("shots", "n_gates_stop"),
                exp.get("shots", "n_gates_points"),
            )
        }
    )

    def one(point):
        index, n_gates = point
        plan = montecarlo.ShotPlan(
            shots_per_block=exp.get("shots", "shots_per_block"),
            n_identity_gates=n_gates,
            seed=sampling.derive_seed(seed, index),
            mode=exp.get("shots", "mode"),
        )
        est = montecarlo.run_blocks(cfg, plan, profile, qubits=qubits)
        report = montecarlo.finite_key(est)
        gamma = profile.qubit_gamma(qubits[0], n_gates)
        return (n_gates, gamma, est.qber, est.phase_error, report.l_sec)

    rows = _pmap(one, list(enumerate(gate_grid)))
    comments = [
        "command = shots",
        f"seed = {seed}",
        f"profile = {profile.name}",
        f"qubits = {','.join(str(q) for q in qubits)}",
    ]
    _write_csv(out, ["n_identity_gates", "gamma", "qber", "phase_error", "l_sec"], rows, comments)
    _write_sidecar(out, exp, "shots")
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify: closed forms against the density-matrix route on fixed grids
# ---------------------------------------------------------------------------


def _check_prepare_measure(which):
    gammas = np.linspace(0.0, 1.0, 21)
    deltas = (0.0, 0.01, 0.03, 0.1)
    worst = 0.0
    count = 0
    for g in gammas:
        for d in deltas:
            if which == "bb84-ad":
                cfg = protocols.ProtocolConfig("bb84", AdParams(g), readout_delta=d)
                closed = protocols.bb84_rates_ad(g, d)
            elif which == "bb84-gad":
                for p in np.linspace(0.0, 1.0, 6):
                    cfg = protocols.ProtocolConfig("bb84", GadParams(g, p), readout_delta=d)
                    closed = protocols.bb84_rates_gad(g, p, d)
                    oracle = protocols.simulate_protocol(cfg)
                    worst = max(worst, abs(closed.e_b - oracle.e_b), abs(closed.e_p - oracle.e_p))
                    count += 1
                continue
            else:
                cfg = protocols.ProtocolConfig("b92", AdParams(g), readout_delta=d)
                closed = protocols.b92_rates(g, d)
            oracle = protocols.simulate_protocol(cfg)
            worst = max(worst, abs(closed.e_b - oracle.e_b), abs(closed.e_p - oracle.e_p))
            count += 1
    return worst, count


def _check_bbm92(pair, distribution, asymmetric=False):
    worst = 0.0
    count = 0
    if asymmetric:
        grid = [(ga, gb) for ga in np.linspace(0.0, 1.0, 11) for gb in np.linspace(0.0, 1.0, 11)]
        for ga, gb in grid:
            cfg = protocols.ProtocolConfig(
                "bbm92", AdParams(0.0), bbm92_pair=pair, bbm92_distribution=distribution,
                gamma_a=ga, gamma_b=gb,
            )
            closed = protocols.bbm92_rates(cfg)
            oracle = protocols.simulate_protocol(cfg)
            worst = max(worst, abs(closed.e_b - oracle.e_b), abs(closed.e_p - oracle.e_p))
            count += 1
        return worst, count
    for g in np.linspace(0.0, 1.0, 41):
        cfg = protocols.ProtocolConfig(
            "bbm92", AdParams(g), bbm92_pair=pair, bbm92_distribution=distribution
        )
        closed = protocols.bbm92_rates(cfg)
        oracle = protocols.simulate_protocol(cfg)
        worst = max(worst, abs(closed.e_b - oracle.e_b), abs(closed.e_p - oracle.e_p))
        count += 1
    return worst, count


def _check_table1(site):
    worst = 0.0
    count = 0
    for beta in np.linspace(0.0, 0.2, 5):
        for gamma in np.linspace(0.1, 0.9, 5):
            fault = dualrail.FaultSite(site, beta)
            e_b_closed, e_p_closed = dualrail.table1_rates(fault, gamma)
            e_b_joint, e_p_joint, _ = dualrail.joint_error_rates(
                dualrail.ANCILLA, AdParams(gamma), fault
            )
            worst = max(worst, abs(e_b_closed - e_b_joint))
            if site != dualrail.SITE_DECODER:
                worst = max(worst, abs(e_p_closed - e_p_joint))
            count += 1
    return worst, count


def _check_gad_encoded():
    worst = 0.0
    count = 0
    for g in np.linspace(0.0, 0.95, 11):
        for p in np.linspace(0.0, 1.0, 11):
            params = GadParams(g, p)
            closed = dualrail.gad_encoded_rates(params)
            e_b_joint, e_p_joint, survival = dualrail.joint_error_rates(dualrail.ANCILLA, params)
            worst = max(
                worst,
                abs(closed.sift - survival),
                abs(closed.e_b * closed.sift - e_b_joint),
                abs(closed.e_p * closed.sift - e_p_joint),
            )
            count += 1
    return worst, count


def cmd_verify(exp: Experiment) -> int:
    """Cross-check every closed-form rate expression against the
    density-matrix route; nonzero exit on any mismatch beyond 1e-10."""
    tol = 1e-10
    checks = [
        ("bb84-ad rates vs density matrix", lambda: _check_prepare_measure("bb84-ad"), "protocols.bb84_rates_ad"),
        ("bb84-gad rates vs density matrix", lambda: _check_prepare_measure("bb84-gad"), "protocols.bb84_rates_gad"),
        ("b92 rates vs density matrix", lambda: _check_prepare_measure("b92"), "protocols.b92_rates"),
        (
            "bbm92 correlated/charlie vs density matrix",
            lambda: _check_bbm92(protocols.CORRELATED, protocols.CHARLIE_MIDPOINT),
            "protocols.bbm92_rates",
        ),
        (
            "bbm92 anti-correlated/charlie vs density matrix",
            lambda: _check_bbm92(protocols.ANTI_CORRELATED, protocols.CHARLIE_MIDPOINT),
            "protocols.bbm92_rates",
        ),
        (
            "bbm92 correlated/alice-sends vs density matrix",
            lambda: _check_bbm92(protocols.CORRELATED, protocols.ALICE_SENDS),
            "protocols.bbm92_rates",
        ),
        (
            "bbm92 asymmetric vs density matrix",
            lambda: _check_bbm92(protocols.CORRELATED, protocols.CHARLIE_MIDPOINT, asymmetric=True),
            "protocols.bbm92_rates",
        ),
        ("encoder-fault joint errors vs closed form", lambda: _check_table1(dualrail.SITE_ENCODER), "dualrail.table1_rates"),
        (
            "post-selection-fault joint errors vs closed form",
            lambda: _check_table1(dualrail.SITE_POST_SELECTION),
            "dualrail.table1_rates",
        ),
        ("decoder-fault joint bit error vs closed form", lambda: _check_table1(dualrail.SITE_DECODER), "dualrail.table1_rates"),
        ("encoded GAD rates vs density matrix", _check_gad_encoded, "dualrail.gad_encoded_rates"),
    ]
    failed = False
    covered = set()
    for name, run, covers in checks:
        worst, count = run()
        covered.add(covers)
        ok = worst <= tol
        failed = failed or not ok
        status = "ok  " if ok else "FAIL"
        print(f"{status} {name}: max|diff| = {worst:.3e} over {count} grid points (tol {tol:.0e})")

    # informational only: the decoder-fault phase error closed form differs
    # from the density-matrix value by the documented factor of two
    beta, gamma = 0.2, 0.5
    fault = dualrail.FaultSite(dualrail.SITE_DECODER, beta)
    _, e_p_closed = dualrail.table1_rates(fault, gamma)
    _, e_p_joint, _ = dualrail.joint_error_rates(dualrail.ANCILLA, AdParams(gamma), fault)
    print(
        "info decoder-fault phase error at (beta=0.2, gamma=0.5): "
        f"closed form {e_p_closed:.6g} vs density matrix {e_p_joint:.6g} "
        "(known discrepancy, reported only)"
    )

    if covered != CLOSED_FORM_OPERATIONS:
        missing = sorted(CLOSED_FORM_OPERATIONS - covered)
        print(f"FAIL closed-form coverage incomplete, missing: {missing}")
        failed = True
    else:
        print(f"ok   closed-form coverage: {len(CLOSED_FORM_OPERATIONS)}/{len(CLOSED_FORM_OPERATIONS)} operations exercised")
    print("verification " + ("FAILED" if failed else "passed"))
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


_COMMANDS = {
    "rates": (cmd_rates, "analytic key-rate sweeps as CSV"),
    "verify": (cmd_verify, "cross-check closed forms against the density-matrix route"),
    "shots": (cmd_shots, "seeded shot-level campaign over idle-gate delays"),
    "sweep-beta": (cmd_sweep_beta, "CNOT-failure sweep of the encoded protocol"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adqkd",
        description="QKD key-rate experiments over amplitude-damped channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (fn, help_text) in _COMMANDS.items():
        cp = sub.add_parser(
            name,
            help=help_text,
            description=(fn.__doc__ or help_text),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        cp.add_argument("--config", help="experiment config file (INI sections of key = value)")
        for flag, section, key in _OVERRIDE_FLAGS:
            cp.add_argument(flag, dest=f"{section}.{key}", metavar="V",
                            help=f"override [{section}] {key}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for flag, section, key in _OVERRIDE_FLAGS:
        raw = getattr(args, f"{section}.{key}", None)
        if raw is not None:
            overrides[(section, key)] = raw
    try:
        exp = load_experiment(args.config, overrides)
        return _COMMANDS[args.command][0](exp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
