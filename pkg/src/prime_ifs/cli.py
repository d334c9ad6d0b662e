"""Command-line entry point: ``prime-ifs <subcommand> ... --out DIR``.

Every subcommand writes its artifacts plus a ``manifest.json`` into the
output directory.  The manifest holds the full parameter map, so
``prime-ifs rerun --manifest M --out DIR`` rebuilds byte-identical files.
Flag names follow the original driver script: ``start``, ``count`` (its
``span``), ``mod``, ``divider`` and ``size`` (its ``imgSize``).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .census import (
    FrequencyTable,
    Interpretation,
    center_alphabet,
    distance_frequencies,
    kgram_frequencies,
    point_census,
    residue_kgram_counts,
    sigma_scan,
    tuple_center_census,
    twin_census,
)
from .errors import InvalidModulusError, PrimeIFSError
from .ifs import (
    RNG_ALGORITHM,
    CellSet,
    chaos_game,
    deterministic_iterate,
    driven_orbit,
    gasket_system,
    standard_square_system,
)
from .primes import (
    PrimeRangeQuery,
    TupleCenterQuery,
    primes_from_count,
    primes_in_range,
    tuple_centers,
    twin_pairs,
)
from .raster import accumulate, render_pgm, write_points_csv
from .residues import (
    SUPPORTED_MODULI,
    ResidueAlphabet,
    SymbolStream,
    abs_diff_stream,
    canonical_orderings,
    rot_distance_stream,
    symbolize,
)

MANIFEST = "manifest.json"


def parse_int(text: str | int) -> int:
    """Integers written as ``1000000``, ``1_000_000``, ``10^6``, ``10**6`` or ``1e6``."""
    if isinstance(text, int):
        return text
    t = str(text).strip().replace("_", "").replace(",", "")
    m = re.fullmatch(r"(\d+)\s*(?:\^|\*\*)\s*(\d+)", t)
    if m:
        return int(m.group(1)) ** int(m.group(2))
    m = re.fullmatch(r"(\d+)[eE](\d+)", t)
    if m:
        return int(m.group(1)) * 10 ** int(m.group(2))
    return int(t)


def parse_int_list(text: str) -> list[int]:
    return [parse_int(tok) for tok in re.split(r"[\s,;]+", text.strip()) if tok]


def parse_ordering(text: str | None) -> list[int] | None:
    if text is None:
        return None
    return parse_int_list(text)


# --------------------------------------------------------------------------- output helpers


class Outputs:
    def __init__(self, out_dir: Path, pretty: bool = False) -> None:
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.pretty = pretty
        self.artifacts: list[str] = []

    def write_bytes(self, name: str, data: bytes) -> None:
        (self.dir / name).write_bytes(data)
        self.artifacts.append(name)

    def write_text(self, name: str, text: str) -> None:
        self.write_bytes(name, text.encode("utf-8"))

    def write_json(self, name: str, payload) -> None:
        self.write_text(name, json.dumps(payload, indent=2) + "\n")

    def say(self, text: str) -> None:
        if self.pretty:
            print(text)


def _table_text(t: FrequencyTable, title: str, limit: int | None = None) -> str:
    rows = t.ranked()
    if limit is not None and len(rows) > 2 * limit:
        rows = rows[:limit] + [("...", None)] + rows[-limit:]
    lines = [title, f"{'key':>16} {'count':>12} {'percent':>9}"]
    for key, c in rows:
        if c is None:
            lines.append(f"{'...':>16}")
            continue
        label = "(" + ", ".join(map(str, key)) + ")" if isinstance(key, tuple) else str(key)
        lines.append(f"{label:>16} {c:>12,} {t.percent(key):>9.3f}")
    lines.append(f"{'total':>16} {t.total:>12,}")
    return "\n".join(lines)


def _label(ordering) -> str:
    return "-".join(map(str, ordering))


def _render(out: Outputs, name: str, points: np.ndarray, p: dict, workers: int | None) -> None:
    grid = accumulate(points, p["size"], workers=workers)
    out.write_bytes(f"{name}.pgm", render_pgm(grid, p["scale"], p.get("divider") or None))
    if p.get("csv"):
        out.write_text(f"{name}.csv", write_points_csv(points))


# --------------------------------------------------------------------------- prime sources


def _alphabet(mod: int, ordering) -> ResidueAlphabet:
    if mod not in SUPPORTED_MODULI:
        raise InvalidModulusError("Please choose modulus 5, 8, 10, or 12")
    if ordering is not None and sorted(ordering) != canonical_orderings(mod)[0]:
        raise InvalidModulusError(
            f"ordering {ordering} is not a permutation of the units mod {mod}: "
            f"{canonical_orderings(mod)[0]}"
        )
    return ResidueAlphabet.for_modulus(mod, ordering)


def _orderings(p: dict) -> list[list[int]]:
    if p.get("ordering"):
        return [p["ordering"]]
    ords = canonical_orderings(p["mod"]) if p["mod"] in SUPPORTED_MODULI else []
    return ords[:2] if p.get("skip_third") else ords


def _prime_query(p: dict) -> PrimeRangeQuery:
    if p.get("limit") is not None:
        return PrimeRangeQuery.by_value(p["start"], p["limit"])
    return PrimeRangeQuery.by_count(p["start"], p["count"])


def _primes(q: PrimeRangeQuery, workers) -> np.ndarray:
    if q.mode.value == "ByValueRange":
        return primes_in_range(q.lo, q.hi, workers=workers)
    return primes_from_count(q.lo, q.count, workers=workers)


def _convention(q: PrimeRangeQuery, source: str, **extra) -> dict:
    rec = {"source": source, **q.convention()}
    rec.update(extra)
    return rec


# --------------------------------------------------------------------------- commands


def cmd_gasket(p: dict, out: Outputs, workers=None) -> dict:
    """Chaos game on the three-map gasket or the four-map filled square."""
    sys_ = gasket_system() if p["system"] == "gasket" else standard_square_system()
    sys_ = sys_.uniform()
    pts = chaos_game(sys_, p["points"], p["seed"], tuple(p["start_point"]))
    _render(out, p["system"], pts, p, workers)

    depth = p["depth"]
    census = point_census(pts[depth - 1 :] if len(pts) >= depth else pts[:0], depth,
                          convention={"source": "chaos_game", "points": p["points"], "skip": depth - 1})
    report = {"census": census.to_json()}
    occupied = sorted(k for k, c in census.entries.items() if c)
    report["occupied_cells"] = len(occupied)
    if p["system"] == "gasket":
        allowed = set(deterministic_iterate(sys_, CellSet.full_square(), depth).labels())
        stray = sorted(set(occupied) - allowed)
        report["attractor_cells"] = len(allowed)
        report["points_outside_attractor_cells"] = stray
        report["empty_check_passed"] = not stray
    out.write_json("census.json", report)
    out.say(f"{p['system']}: {len(pts)} points, {len(occupied)} of {4**depth} depth-{depth} cells visited")
    return {"convention": census.convention, "seed": p["seed"], "rng": RNG_ALGORITHM}


def _drive_streams(p: dict, workers, tag: str):
    alph0 = _alphabet(p["mod"], p.get("ordering"))
    q = _prime_query(p)
    primes = _primes(q, workers)
    conv = _convention(q, "primes")
    for ordering in _orderings(p):
        alphabet = alph0 if p.get("ordering") else ResidueAlphabet.for_modulus(p["mod"], ordering)
        stream = symbolize(primes, alphabet, {"convention": conv})
        yield alphabet, primes, stream, conv, f"{tag}_mod{p['mod']}_{_label(alphabet.classes)}"


def cmd_drive(p: dict, out: Outputs, workers=None) -> dict:
    """Drive the square system with prime residues under each requested ordering."""
    conv = None
    for alphabet, primes, stream, conv, name in _drive_streams(p, workers, "drive"):
        pts = driven_orbit(stream)
        _render(out, name, pts, p, workers)
        k = p["depth"]
        addr = kgram_frequencies(stream, k, convention=conv, workers=workers)
        resid = residue_kgram_counts(primes, alphabet, k, convention=conv, workers=workers)
        out.write_json(f"{name}_address_k{k}.json", addr.to_json())
        out.write_json(f"{name}_residue_k{k}.json", resid.to_json())
        out.say(_table_text(resid, f"Mod {alphabet.modulus}: {alphabet.label()}  sigma={resid.sigma:.2f}", 8))
    return {"convention": conv, "seed": None}


def cmd_rotdist(p: dict, out: Outputs, workers=None) -> dict:
    """Plot and census of the forward rotational distance stream."""
    conv = None
    for alphabet, _, base, conv, name in _drive_streams(p, workers, "rotdist"):
        stream = rot_distance_stream(base)
        _render(out, name, driven_orbit(stream), p, workers)
        dist = distance_frequencies(base, convention=conv)
        addr = kgram_frequencies(stream, p["depth"], convention=conv, workers=workers)
        out.write_json(f"{name}_distance.json", dist.to_json())
        out.write_json(f"{name}_address_k{p['depth']}.json", addr.to_json())
        out.say(_table_text(dist, f"Rotational distances, mod {alphabet.modulus} {alphabet.label()}"))
    return {"convention": conv, "seed": None}


def cmd_absdiff(p: dict, out: Outputs, workers=None) -> dict:
    """Plot and census of the absolute-difference stream, with its empty addresses."""
    conv = None
    for alphabet, _, base, conv, name in _drive_streams(p, workers, "absdiff"):
        stream = abs_diff_stream(base)
        _render(out, name, driven_orbit(stream), p, workers)
        addr = kgram_frequencies(stream, p["depth"], convention=conv, workers=workers)
        payload = addr.to_json()
        payload["forbidden"] = addr.zero_keys()
        out.write_json(f"{name}_address_k{p['depth']}.json", payload)
        out.say(f"mod {alphabet.modulus} {alphabet.label()}: empty depth-{p['depth']} addresses "
                f"{' '.join(addr.zero_keys()) or '(none)'}")
    return {"convention": conv, "seed": None}


def cmd_twins(p: dict, out: Outputs, workers=None) -> dict:
    """Residue censuses of twin prime pairs and the plot of their concatenation."""
    q = _prime_query(p)
    pairs = twin_pairs(q, workers=workers)
    conv = _convention(q, "twin_pairs", unit="pairs")
    alphabet = _alphabet(10, p.get("ordering") or [1, 3, 7, 9])
    census = twin_census(pairs, alphabet, convention=conv, workers=workers)
    kept = pairs[(alphabet.lookup_table()[pairs % 10] != 0).all(axis=1)].ravel()
    stream = symbolize(kept, alphabet) if kept.size else SymbolStream(np.zeros(0, np.int8))
    _render(out, f"twins_mod10_{_label(alphabet.classes)}", driven_orbit(stream), p, workers)
    out.write_json("twins_census.json", census.to_json())
    out.say(_table_text(census.concatenated, "Concatenated twin stream, residue pairs mod 10"))
    out.say(_table_text(census.classes, "Twin classes"))
    out.say("zero pairs: " + ", ".join(str(k) for k in census.forbidden))
    return {"convention": conv, "seed": None}


def cmd_tuple(p: dict, out: Outputs, workers=None) -> dict:
    """Residues mod 8 of the centers n with n - d and n + d both prime."""
    d = p["offset"]
    if d < 1:
        raise PrimeIFSError("offset must be >= 1 (d = 0 gives no prime pair)")
    q = _prime_query(p)
    centers = tuple_centers(TupleCenterQuery(d, q), workers=workers)
    conv = _convention(q, f"tuple_centers(d={d})", unit="centers", shift=p["shift"])
    # Centers share the parity of d + 1; a shift can flip it.
    alphabet = center_alphabet(d + p["shift"])
    stream = symbolize(centers + p["shift"], alphabet)
    _render(out, f"tuple_d{d}", driven_orbit(stream), p, workers)
    k, top = p["depth"], p["top"]
    table = tuple_center_census(centers, alphabet, k, shift=p["shift"], convention=conv, workers=workers)
    payload = table.to_json()
    hi, lo = table.highest(top), table.lowest(top)
    payload["top"] = [{"key": list(key), "count": c} for key, c in hi]
    payload["bottom"] = [{"key": list(key), "count": c} for key, c in lo]
    payload["top_bottom_ratio"] = hi[0][1] / lo[0][1] if lo and lo[0][1] else None
    out.write_json(f"tuple_d{d}_k{k}.json", payload)
    out.say(_table_text(table, f"Centers n with n±{d} prime, residues mod 8, length {k}", top))
    return {"convention": conv, "seed": None}


def cmd_sigma_scan(p: dict, out: Outputs, workers=None) -> dict:
    """Pair-count standard deviation at increasing starting points."""
    choice = p["interpretation"]
    if choice == "both":
        interps = [Interpretation.WINDOW_WIDTH, Interpretation.PRIME_COUNT]
    elif choice == "all":
        interps = list(Interpretation)
    else:
        interps = [Interpretation.parse(choice)]
    rows = []
    for interp in interps:
        rows += sigma_scan(p["x0_list"], p["size"], p["mod"], p.get("ordering"), interp, workers=workers)
    out.write_json("sigma_scan.json", {"size": p["size"], "mod": p["mod"], "rows": [r.to_json() for r in rows]})
    for r in rows:
        out.say(f"{r.interpretation.value:>12} {r.x0:>16} {r.sigma:>14.2f}")
    return {"convention": {"source": "sigma_scan", "size": p["size"],
                           "interpretations": [i.value for i in interps]}, "seed": None}


COMMANDS: dict[str, Callable[..., dict]] = {
    "gasket": cmd_gasket,
    "drive": cmd_drive,
    "rotdist": cmd_rotdist,
    "absdiff": cmd_absdiff,
    "twins": cmd_twins,
    "tuple": cmd_tuple,
    "sigma-scan": cmd_sigma_scan,
}


def execute(subcommand: str, params: dict, out_dir: Path, *, pretty: bool = False,
            workers: int | None = None) -> dict:
    """Run one subcommand and write its manifest; returns the manifest."""
    out = Outputs(out_dir, pretty)
    meta = COMMANDS[subcommand](params, out, workers)
    manifest = {
        "tool": "prime-ifs",
        "version": __version__,
        "subcommand": subcommand,
        "parameters": params,
        "convention": meta.get("convention"),
        "seed": meta.get("seed"),
        "rng": meta.get("rng"),
        "artifacts": out.artifacts + [MANIFEST],
    }
    out.write_json(MANIFEST, manifest)
    return manifest


# --------------------------------------------------------------------------- argument parsing


def _add_render_flags(sp: argparse.ArgumentParser, depth: int = 2) -> None:
    sp.add_argument("--size", type=parse_int, default=360, help="image side in pixels")
    sp.add_argument("--scale", choices=["log", "linear"], default="log")
    sp.add_argument("--divider", type=int, default=0, help="draw gridlines at multiples of size/divider")
    sp.add_argument("--depth", type=int, default=depth, help="address/tuple length for the census")
    sp.add_argument("--csv", action="store_true", help="also write the orbit points as CSV")


def _add_range_flags(sp: argparse.ArgumentParser, start: int, count: int) -> None:
    sp.add_argument("--start", type=parse_int, default=start, help="smallest value admitted")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--count", type=parse_int, default=count, help="how many items from --start")
    g.add_argument("--limit", type=parse_int, default=None, help="largest value admitted instead of --count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prime-ifs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, required=True, help="output directory")
    common.add_argument("--pretty", action="store_true", help="print human-readable tables")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $PRIME_IFS_THREADS or 1)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("gasket", parents=[common], help="chaos game on the gasket or the filled square")
    sp.add_argument("--system", choices=["gasket", "square"], default="gasket")
    sp.add_argument("--points", type=parse_int, default=100_000)
    sp.add_argument("--seed", type=parse_int, default=0)
    sp.add_argument("--start-point", type=float, nargs=2, default=[0.0, 0.0], metavar=("X", "Y"))
    _add_render_flags(sp, depth=3)

    for name, helptext in (("drive", "prime residues drive the square system"),
                           ("rotdist", "forward rotational distance stream"),
                           ("absdiff", "absolute difference stream")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--mod", type=int, default=10)
        sp.add_argument("--ordering", type=parse_ordering, default=None, help='e.g. "1 3 7 9"')
        sp.add_argument("--skip-third", action="store_true",
                        help="without --ordering, render only the first two canonical orderings")
        _add_range_flags(sp, start=7, count=100_000)
        _add_render_flags(sp, depth=3 if name == "absdiff" else 2)

    sp = sub.add_parser("twins", parents=[common], help="twin prime residue censuses")
    sp.add_argument("--ordering", type=parse_ordering, default=None)
    _add_range_flags(sp, start=5, count=10_000)
    _add_render_flags(sp)

    sp = sub.add_parser("tuple", parents=[common], help="centers n with n-d and n+d prime")
    sp.add_argument("--offset", type=int, default=1)
    sp.add_argument("--shift", type=int, default=0, help="census residues of n + shift")
    sp.add_argument("--top", type=int, default=4)
    _add_range_flags(sp, start=0, count=100_000)
    _add_render_flags(sp)

    sp = sub.add_parser("sigma-scan", parents=[common], help="sigma of pair counts vs start")
    sp.add_argument("--x0-list", type=parse_int_list, required=True, help='e.g. "7,10^6,10^7"')
    sp.add_argument("--size", type=parse_int, default=1_000_000)
    sp.add_argument("--mod", type=int, default=10)
    sp.add_argument("--ordering", type=parse_ordering, default=None)
    sp.add_argument("--interpretation", default="count",
                    choices=["window", "count", "index", "both", "all"])

    sp = sub.add_parser("rerun", help="re-execute a run from its manifest")
    sp.add_argument("--manifest", type=Path, required=True)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--pretty", action="store_true")
    sp.add_argument("--workers", type=int, default=None)
    return parser


_NOT_PARAMETERS = {"subcommand", "out", "pretty", "workers"}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "rerun":
            manifest = json.loads(args.manifest.read_text())
            execute(manifest["subcommand"], manifest["parameters"], args.out,
                    pretty=args.pretty, workers=args.workers)
        else:
            params = {k: v for k, v in vars(args).items() if k not in _NOT_PARAMETERS}
            if params.get("mod") is not None and params["mod"] not in SUPPORTED_MODULI:
                raise InvalidModulusError("Please choose modulus 5, 8, 10, or 12")
            execute(args.subcommand, params, args.out, pretty=args.pretty, workers=args.workers)
    except PrimeIFSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
