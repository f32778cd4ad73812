"""JSON documents for geometries and trap ensembles (lengths in nm)."""
import json

import numpy as np

from .geometry import Encoding, QubitGeometry, TrapEnsemble, TrapRegion

NM = 1e-9


def geometry_to_dict(geom: QubitGeometry) -> dict:
    return {
        "kind": geom.kind.value,
        "side_length_nm": geom.side_length / NM,
        "dots_nm": (geom.dots / NM).tolist(),
        "occupancy": {k: list(v) for k, v in geom.occupancy.items()},
    }


def geometry_from_dict(data: dict) -> QubitGeometry:
    occupancy = data.get("occupancy")
    if occupancy is not None:
        occupancy = {str(k): tuple(int(i) for i in v) for k, v in occupancy.items()}
    return QubitGeometry(
        Encoding.parse(data["kind"]),
        np.asarray(data["dots_nm"], dtype=float) * NM,
        float(data["side_length_nm"]) * NM,
        occupancy,
    )


def traps_to_dict(traps: TrapEnsemble) -> dict:
    out = {
        "traps": [
            {"position_nm": (p / NM).tolist(), "rate_hz": float(r)}
            for p, r in zip(traps.positions, traps.rates)
        ],
        "density_per_m2": traps.density,
        "seed": traps.seed,
    }
    if traps.region is not None:
        r = traps.region
        out["region_nm"] = {"width": r.width / NM, "height": r.height / NM, "z": r.z / NM,
                            "center_x": r.center_x / NM, "center_y": r.center_y / NM}
    return out


def traps_from_dict(data: dict) -> TrapEnsemble:
    items = data["traps"]
    pos = np.array([t["position_nm"] for t in items], dtype=float).reshape(-1, 3) * NM
    rates = np.array([t["rate_hz"] for t in items], dtype=float)
    region = None
    if data.get("region_nm"):
        region = TrapRegion(**{k: float(v) * NM for k, v in data["region_nm"].items()})
    return TrapEnsemble(pos, rates, region, data.get("density_per_m2"), data.get("seed"))


def load_geometries(path) -> dict:
    """Geometries from a file holding one geometry object or ``{"geometries": [...]}``, keyed by kind."""
    with open(path) as fh:
        data = json.load(fh)
    items = data["geometries"] if "geometries" in data else [data]
    return {g.kind: g for g in map(geometry_from_dict, items)}


def save_geometries(path, geometries) -> None:
    with open(path, "w") as fh:
        json.dump({"geometries": [geometry_to_dict(g) for g in geometries]}, fh, indent=2)
        fh.write("\n")


def load_traps(path) -> TrapEnsemble:
    with open(path) as fh:
        return traps_from_dict(json.load(fh))


def save_traps(path, traps: TrapEnsemble) -> None:
    with open(path, "w") as fh:
        json.dump(traps_to_dict(traps), fh, indent=2)
        fh.write("\n")
