"""CLI for plrmc - build circuits, verify them and compute their invariants"""

import click
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from plrmc.config.loader import (
    ModelConfigLoader,
    RunConfig,
    load_config_file,
    parse_fraction,
    resolve_run_config,
)
from plrmc.core.pauli import Lattice, LayeredLattice, Region, format_pauli, parse_pauli, to_doubled
from plrmc.core.stab import StabilizerGroup, centralizer_in_region
from plrmc.decompose.ising import ising_decompose
from plrmc.dynamics.mqca import MqcaMap, mqca_index, period_map, trace_logical
from plrmc.dynamics.rev import is_topological
from plrmc.exceptions import (
    ConfigError,
    PauliSyntaxError,
    PlrmcError,
    PreconditionError,
    UnknownSiteError,
    WindowTooSmallError,
)
from plrmc.models.glue import pair_products
from plrmc.models.registry import MODELS, build_model
from plrmc.models.sequence import IsgSequence, verify
from plrmc.reports import banner, config_lines, emit, key_values, make_report, status
from plrmc.telemetry import telemetry

logger = logging.getLogger(__name__)

USAGE_ERRORS = (ConfigError, PauliSyntaxError, UnknownSiteError)
GLUED_MODELS = ("double-wpt", "wpt-hh")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _fail(error: PlrmcError):
    """Report a library error on stderr and exit with its code"""
    code = 2 if isinstance(error, USAGE_ERRORS) else 1
    click.echo(click.style(f"ERROR: {error}", fg="red"), err=True)
    for line in getattr(error, "errors", []):
        click.echo(f"  - {line}", err=True)
    sys.exit(code)


def model_options(f):
    """--model, --boundary, --width, --height, -n and --radius"""
    options = [
        click.option("--model", "-m", type=click.Choice(list(MODELS)), help="Built-in model"),
        click.option("--boundary", "-b", help="Boundary variant of the model"),
        click.option("--width", type=int, help="Window width"),
        click.option("--height", type=int, help="Window height"),
        click.option("-n", "n", type=int, help="Number of sites (1D models)"),
        click.option("--radius", help="Conjugate-basis search radius, e.g. 1 or 3/2"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _run_config(ctx: click.Context, command: str, flags: Dict[str, Any],
                default_model: Optional[str] = None) -> RunConfig:
    obj = ctx.obj
    path = obj["config_path"]
    file_config = load_config_file(path) if path else None
    overrides = dict(flags)
    overrides["seed"] = obj["seed"]
    overrides["margin_override"] = obj["margin"]
    if default_model and not overrides.get("model") and not (file_config or {}).get("model"):
        overrides["model"] = default_model
    return resolve_run_config(command, file_config, overrides, obj["output"], source=path or "flags")


def _sequence(rc: RunConfig) -> IsgSequence:
    built = build_model(rc)
    if isinstance(built, MqcaMap):
        raise PreconditionError(f"model {rc.model} is a map, not a measurement circuit")
    return built


@click.group()
@click.option("--output", "-o", type=click.Choice(["text", "json"]), default="text",
              help="Report format on stdout")
@click.option("--config", "-c", "config_path", type=click.Path(), default=None,
              help="Model config file (YAML or JSON)")
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None,
              help="Seed for randomized models")
@click.option("--margin", default=None, help="Margin override for index cuts, e.g. 3 or 5/2")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.option("--quiet", "-q", is_flag=True, help="Warnings and errors only")
@click.option("--trace", is_flag=True, help="Print OpenTelemetry spans to the console")
@click.version_option(package_name="plrmc")
@click.pass_context
def cli(ctx, output: str, config_path: Optional[str], seed: Optional[int], margin: Optional[str],
        verbose: bool, quiet: bool, trace: bool):
    """plrmc - periodic locally reversible measurement circuits"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    logging.getLogger().setLevel(level)

    if trace:
        telemetry.initialize(export_to_console=True)
        ctx.call_on_close(telemetry.shutdown)

    ctx.obj = {"output": output, "config_path": config_path, "seed": seed, "margin": margin}


@cli.command("verify")
@model_options
@click.pass_context
def verify_cmd(ctx, **flags):
    """Check every transition for local reversibility"""
    try:
        rc = _run_config(ctx, "verify", flags)
        seq = _sequence(rc)
        result = verify(seq)
    except PlrmcError as e:
        _fail(e)

    report = make_report("verify", rc.to_json(), model=seq.describe(), verify=result.to_json())

    lines = config_lines(rc.to_json()) + banner("VERIFY")
    lines += key_values([("Circuit", seq.name), ("Period", seq.period), ("Radius", seq.radius)])
    for t in result.transitions:
        tr = t.report
        lines.append(f"  transition {t.index}: [{status(t.passed)}] "
                     f"reversible={tr.reversible} local={tr.locally_reversible}")
        if tr.witness is not None:
            lines.append(f"    witness ({tr.witness_side}): {format_pauli(tr.witness)}")
    lines.append("")
    lines.append(f"Result: {status(result.passed)}")
    emit(report, rc.output, lines)

    if not result.passed:
        sys.exit(1)


@cli.command("index")
@model_options
@click.pass_context
def index_cmd(ctx, **flags):
    """MQCA index of one period at the configured cuts"""
    try:
        rc = _run_config(ctx, "index", flags)
        built = build_model(rc)
        m = built if isinstance(built, MqcaMap) else period_map(built)
        cuts = rc.cuts or [(None, None)]
        results = [mqca_index(m, a, b, margin=rc.margin_override) for a, b in cuts]
    except PlrmcError as e:
        _fail(e)

    values = {r.value for r in results}
    first = results[0]
    sections = {
        "map": m.describe(),
        "results": [r.to_json() for r in results],
        "index": str(first.value),
        "index_times_two": first.index_times_two,
        "z2": first.to_json()["z2"],
        "cut_independent": len(values) == 1,
    }
    if isinstance(built, IsgSequence) and "expected_index" in built.metadata:
        sections["expected_index"] = built.metadata["expected_index"]
    report = make_report("index", rc.to_json(), **sections)

    lines = config_lines(rc.to_json()) + banner("MQCA INDEX")
    lines += key_values([("Map", m.name), ("Logicals", len(m.elements)), ("Range", m.range)])
    for r in results:
        lines.append(f"  cuts b={r.cut_b} a={r.cut_a}: index {r.value} "
                     f"(dims {r.dims[0]}/{r.dims[1]}, margin {r.margin})")
    lines.append("")
    lines.append(f"Index: {first.value}")
    lines.append(f"Z2 invariant: {sections['z2']}")
    if len(values) > 1:
        lines.append(click.style("WARNING: index depends on the cut choice", fg="yellow"))
    emit(report, rc.output, lines)


def _read_stabilizer_file(path: str) -> StabilizerGroup:
    """Stabilizer group from a file with a ``lattice`` entry or a 1D chain shorthand

    The shorthand is ``{sites: n, qubits_per_site: q, generators: [...]}``.
    """
    data = load_config_file(path)
    try:
        if "lattice" in data:
            return StabilizerGroup.from_json(data)
        lattice = Lattice.chain(int(data["sites"]), int(data.get("qubits_per_site", 1)))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"stabilizer file {path} is malformed: {e}") from e
    gens = [parse_pauli(text, lattice) for text in data.get("generators", [])]
    return StabilizerGroup(lattice, gens, name=data.get("name", Path(path).stem))


@cli.command("decompose")
@click.argument("stab_file", type=click.Path(exists=True))
@click.pass_context
def decompose_cmd(ctx, stab_file: str):
    """Ising-chain decomposition of a 1D two-site-local stabilizer group"""
    rc = RunConfig(
        command="decompose", output=ctx.obj["output"], input_file=stab_file,
        source=ctx.obj["config_path"] or "flags",
    )
    try:
        g = _read_stabilizer_file(stab_file)
        rc.name = g.name
        result = ising_decompose(g)
    except PlrmcError as e:
        _fail(e)

    data = result.to_json()
    report = make_report(
        "decompose", rc.to_json(),
        input={"generators": len(g.generators), "qubits": g.lattice.num_qubits,
               "sites": len(g.lattice.sites)},
        decomposition=data,
    )

    lines = config_lines(rc.to_json()) + banner("DECOMPOSITION")
    lines += key_values([
        ("Ising chains", len(result.chains)),
        ("Bell pairs", len(result.bell_pairs)),
        ("Free qubits", len(result.free_qubits)),
        ("Unconstrained qubits", len(result.unconstrained_qubits)),
    ])
    for k, chain in enumerate(result.chains):
        lines.append(f"  chain {k}: sites {chain.first_site}..{chain.last_site}")
    for entry in data["clifford"]:
        lines.append(f"  site ({','.join(entry['site'])}): {' '.join(entry['matrix'])}")
    if not data["clifford"]:
        lines.append("  clifford: identity")
    emit(report, rc.output, lines)


def _starting_logical(seq: IsgSequence, text: Optional[str], index: Optional[int]):
    if text is not None:
        return parse_pauli(text, seq.lattice)
    candidates = seq.metadata.get("edge_logicals")
    if not candidates:
        if seq.interface is None:
            raise PreconditionError(f"{seq.name} has no interface; pass --logical")
        candidates = centralizer_in_region(
            seq.base, seq.interface, axis=seq.axis, window=seq.window
        ).elements
    k = index or 0
    if not 0 <= k < len(candidates):
        raise PreconditionError(f"logical index {k} out of range (0..{len(candidates) - 1})")
    return candidates[k]


@cli.command("logical-trace")
@model_options
@click.option("--logical", "-l", "logical", help="Starting logical as Pauli text, e.g. 'Z(0,3) X(0,4)'")
@click.option("--logical-index", type=int, help="Index into the model's boundary logicals")
@click.option("--cycles", type=click.IntRange(1), default=1, help="Number of periods to follow")
@click.pass_context
def logical_trace_cmd(ctx, logical: Optional[str], logical_index: Optional[int], cycles: int, **flags):
    """Follow a logical operator through every measurement step"""
    try:
        rc = _run_config(ctx, "logical-trace", flags)
        seq = _sequence(rc)
        start = _starting_logical(seq, logical, logical_index)
        ops = trace_logical(seq, start, cycles)
    except PlrmcError as e:
        _fail(e)

    per_cycle = max(seq.num_transitions, 1)
    steps = [
        {"step": k, "cycle": (k - 1) // per_cycle + 1 if k else 0,
         "operator": format_pauli(op), "weight": op.weight, "diameter": str(op.diameter())}
        for k, op in enumerate(ops)
    ]
    report = make_report("logical-trace", rc.to_json(), start=format_pauli(start),
                         cycles=cycles, steps=steps)

    lines = config_lines(rc.to_json()) + banner("LOGICAL TRACE")
    for entry in steps:
        lines.append(f"  step {entry['step']:>3}: {entry['operator']}")
    emit(report, rc.output, lines)


@cli.command("glue")
@model_options
@click.pass_context
def glue_cmd(ctx, **flags):
    """Verify a glued circuit and check that its glued interface carries no logicals"""
    try:
        rc = _run_config(ctx, "glue", flags, default_model="double-wpt")
        if rc.model not in GLUED_MODELS:
            raise ConfigError(f"glue works on {' or '.join(GLUED_MODELS)}, not {rc.model}")
        seq = _sequence(rc)
        result = verify(seq)
        glued = centralizer_in_region(seq.base, seq.interface, axis=seq.axis, window=seq.window)
        open_index = mqca_index(
            period_map(seq, seq.metadata["open_interface"], seq.axis), margin=rc.margin_override
        )
        strip_index = mqca_index(
            period_map(seq, Region.everything(seq.lattice), seq.axis), margin=rc.margin_override
        )
    except PlrmcError as e:
        _fail(e)

    pairs = len(pair_products(seq))
    report = make_report(
        "glue", rc.to_json(),
        model=seq.describe(),
        verify=result.to_json(),
        glued_pairs=pairs,
        interface_logicals=len(glued),
        open_index=open_index.to_json(),
        strip_index=strip_index.to_json(),
    )

    lines = config_lines(rc.to_json()) + banner("GLUE")
    lines += key_values([
        ("Circuit", seq.name),
        ("Period", seq.period),
        ("Glued pairs", pairs),
        ("Verify", status(result.passed)),
        ("Glued interface logicals", len(glued)),
        ("Open edge index", open_index.value),
        ("Strip index", strip_index.value),
    ])
    emit(report, rc.output, lines)

    if not result.passed or len(glued):
        sys.exit(1)


@cli.command("list-models")
@click.option("--config-dir", default="configs", help="Directory of shipped model configs")
@click.pass_context
def list_models_cmd(ctx, config_dir: str):
    """List built-in models and validate the shipped configs"""
    models = [
        {
            "name": info.name,
            "description": info.description,
            "boundaries": list(info.boundaries),
            "defaults": {k: str(v) if isinstance(v, Fraction) else v for k, v in info.defaults.items()},
            "returns_map": info.returns_map,
        }
        for info in MODELS.values()
    ]
    configs = []
    if Path(config_dir).is_dir():
        loader = ModelConfigLoader(config_dir)
        for name, config in loader.load_configs().items():
            errors = loader.validate_config(config)
            configs.append({"name": name, "model": config.get("model"), "valid": not errors,
                            "errors": errors})

    report = make_report("list-models", {"config_dir": config_dir, "output": ctx.obj["output"]},
                         models=models, configs=configs)

    lines = banner("MODELS")
    for entry in models:
        lines.append(f"  {entry['name']:<16} {entry['description']}")
        if entry["boundaries"]:
            lines.append(f"  {'':<16} boundaries: {', '.join(entry['boundaries'])}")
    if configs:
        lines += banner(f"CONFIGS ({config_dir})")
        for entry in configs:
            if entry["valid"]:
                lines.append(f"  {click.style(entry['name'], fg='green')}: {entry['model']}")
            else:
                lines.append(f"  {click.style(entry['name'], fg='red')}: {len(entry['errors'])} errors")
                lines += [f"    - {error}" for error in entry["errors"]]
    emit(report, ctx.obj["output"], lines)

    if any(not entry["valid"] for entry in configs):
        sys.exit(1)


def _bulk_region(g: StabilizerGroup, ell2: int) -> Region:
    """Qubits at least 2ℓ away from every open window edge"""
    lattice = g.lattice
    skip = {0} if isinstance(lattice, LayeredLattice) else set()
    mask = np.ones(lattice.num_qubits, dtype=bool)
    for axis, period in enumerate(lattice.periods):
        if period is not None or axis in skip:
            continue
        col = lattice.coords[:, axis]
        mask &= (col >= col.min() + 2 * ell2) & (col <= col.max() - 2 * ell2)
    if not mask.any():
        raise WindowTooSmallError("no qubit lies 2ℓ away from the window edges")
    return Region(lattice, np.flatnonzero(mask))


@cli.command("check-topological")
@model_options
@click.option("--ell", help="Locality length ℓ (default: the base group's locality radius)")
@click.option("--max-box", type=click.IntRange(1), default=2, help="Largest test box in units of ℓ")
@click.option(
    "--max-weight", type=click.IntRange(0), default=2,
    help="Largest weight of the local operators to clean",
)
@click.pass_context
def check_topological_cmd(ctx, ell: Optional[str], max_box: int, max_weight: int, **flags):
    """Check the base stabilizer group for topological order away from window edges"""
    try:
        rc = _run_config(ctx, "check-topological", flags)
        seq = _sequence(rc)
        g = seq.base
        try:
            length = parse_fraction(ell) if ell is not None else g.locality_radius
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"--ell must be a number: {e}") from e
        bulk = _bulk_region(g, to_doubled(length))
        result = is_topological(g, bulk, length, max_box=max_box, max_weight=max_weight)
    except PlrmcError as e:
        _fail(e)

    report = make_report(
        "check-topological", rc.to_json(),
        model=seq.describe(),
        ell=str(length),
        bulk_qubits=len(bulk),
        topological=result.topological,
        condition=result.condition,
        witness=None if result.witness is None else format_pauli(result.witness),
        checked_boxes=result.checked_boxes,
        checked_operators=result.checked_operators,
    )

    lines = config_lines(rc.to_json()) + banner("TOPOLOGICAL CHECK")
    lines += key_values([
        ("Group", g.name or seq.name),
        ("Bulk qubits", len(bulk)),
        ("Boxes checked", result.checked_boxes),
        ("Operators checked", result.checked_operators),
        ("Result", status(result.topological, "TOPOLOGICAL", "NOT TOPOLOGICAL")),
    ])
    if result.witness is not None:
        lines.append(f"  {result.condition}: {format_pauli(result.witness)}")
    emit(report, rc.output, lines)

    if not result.topological:
        sys.exit(1)


if __name__ == "__main__":
    cli()
