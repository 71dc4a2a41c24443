"""Zone-plate validation, noisy gradient recovery and tile stitching.

All derivative grids are in per-sample units: analytic derivatives are
multiplied by the grid spacing ``h`` so they are comparable with the output
of a derivative matrix applied to samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diffmatrix import MatrixScheme, build_matrix
from .recover import GradientField, RecoverySettings, recover_surface, recovery_matrices, _solver
from .tensorops import partial_x, partial_y

__all__ = [
    "DegenerateCalibration",
    "LayoutMismatch",
    "MonteCarloConfig",
    "TileSet",
    "WidthTooLarge",
    "ZeroReference",
    "ZonePlate",
    "ZonePlateConfig",
    "flat_field",
    "monte_carlo_recovery",
    "nmse",
    "noise_generator",
    "nrmse",
    "recovery_gradients",
    "split_interior_boundary",
    "stitch_recover",
    "synth_tiles",
    "zone_plate",
]


class ZeroReference(ValueError):
    pass


class WidthTooLarge(ValueError):
    pass


class DegenerateCalibration(ValueError):
    pass


class LayoutMismatch(ValueError):
    pass


def noise_generator(seed: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``seed`` (any non-negative int)."""
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**128 - 1)))


# --------------------------------------------------------------------------- zone plate


@dataclass(frozen=True)
class ZonePlateConfig:
    grid_size: int = 128
    omega_x: float = 1.6 * math.pi
    omega_y: float = 1.6 * math.pi

    def __post_init__(self):
        if self.grid_size < 8:
            raise ValueError("grid_size must be at least 8")
        if not (self.omega_x > 0 and self.omega_y > 0):
            raise ValueError("omegas must be positive")

    @property
    def h(self) -> float:
        return 2.0 / (self.grid_size - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.grid_size)


@dataclass(frozen=True)
class ZonePlate:
    f: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    fxy: np.ndarray
    fxx: np.ndarray


def zone_plate(cfg: ZonePlateConfig = ZonePlateConfig(), x_shift: float = 0.0,
               y_shift: float = 0.0) -> ZonePlate:
    """Samples of ``sin((wx x)^2 + (wy y)^2)`` and its partials on ``[-1, 1]^2``.

    ``x`` runs along columns and ``y`` along rows.  ``x_shift``/``y_shift``
    move the sampling points by that many grid steps, e.g. ``0.5`` for the
    half-nodes a staggered forward matrix evaluates at.
    """
    h = cfg.h
    t = cfg.axis()
    y, x = np.meshgrid(t + y_shift * h, t + x_shift * h, indexing="ij")
    ax, ay = cfg.omega_x ** 2, cfg.omega_y ** 2
    arg = ax * x * x + ay * y * y
    s, c = np.sin(arg), np.cos(arg)
    return ZonePlate(
        f=s,
        fx=2 * ax * x * c * h,
        fy=2 * ay * y * c * h,
        fxy=-4 * ax * ay * x * y * s * h * h,
        fxx=(2 * ax * c - 4 * ax * ax * x * x * s) * h * h,
    )


def recovery_gradients(cfg: ZonePlateConfig, scheme: str) -> tuple[np.ndarray, GradientField]:
    """Ground-truth surface and the gradient samples a recovery scheme expects.

    Staggered recovery uses forward matrices, whose rows estimate at
    ``j + 1/2``, so its gradients are sampled at those half-nodes.
    """
    truth = zone_plate(cfg).f
    if scheme == "staggered":
        gx = zone_plate(cfg, x_shift=0.5).fx
        gy = zone_plate(cfg, y_shift=0.5).fy
    else:
        zp = zone_plate(cfg)
        gx, gy = zp.fx, zp.fy
    return truth, GradientField(gx, gy)


# --------------------------------------------------------------------------- metrics


def nrmse(est, ref) -> float:
    est = np.asarray(est, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if est.shape != ref.shape:
        raise ValueError(f"shapes differ: {est.shape} vs {ref.shape}")
    den = np.linalg.norm(ref)
    if den == 0:
        raise ZeroReference("reference has zero norm")
    return float(np.linalg.norm(est - ref) / den)


def nmse(est, ref) -> float:
    return nrmse(est, ref) ** 2


def split_interior_boundary(G, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a grid into its interior block and a boundary-frame mask.

    Returns ``(interior, mask)`` where ``interior`` is a view of the central
    block and ``mask`` is True on the frame of thickness ``width``.
    """
    G = np.asarray(G)
    if width < 0 or 2 * width >= min(G.shape):
        raise WidthTooLarge(f"width {width} leaves no interior in a {G.shape} grid")
    mask = np.ones(G.shape, dtype=bool)
    n1, n2 = G.shape
    mask[width:n1 - width, width:n2 - width] = False
    return G[width:n1 - width, width:n2 - width], mask


def _region_errors(est: np.ndarray, ref: np.ndarray, width: int) -> tuple[float, float]:
    est_in, mask = split_interior_boundary(est, width)
    ref_in, _ = split_interior_boundary(ref, width)
    interior = nrmse(est_in, ref_in)
    boundary = nrmse(est[mask], ref[mask]) if mask.any() else 0.0
    return interior, boundary


# --------------------------------------------------------------------------- Monte Carlo


def _default_sigmas() -> tuple[float, ...]:
    return tuple(round(0.01 * k, 2) for k in range(1, 11))


def _default_harmonics() -> tuple[float, ...]:
    return tuple(0.2 * k * math.pi for k in range(1, 11))


@dataclass(frozen=True)
class MonteCarloConfig:
    sigmas: tuple[float, ...] = field(default_factory=_default_sigmas)
    trials: int = 100
    seed: int = 0
    harmonics: tuple[float, ...] = field(default_factory=_default_harmonics)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(not s >= 0 for s in self.sigmas):
            raise ValueError("sigmas must be non-negative")
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "harmonics", tuple(float(w) for w in self.harmonics))


def monte_carlo_recovery(zp: ZonePlateConfig, mc: MonteCarloConfig,
                         settings: list[RecoverySettings]) -> list[dict]:
    """Average interior/boundary NRMSE of noisy zone-plate recovery.

    Trial ``t`` draws standard-normal noise for ``gx`` and ``gy`` from the
    stream keyed by ``seed ^ t``; the same draw, scaled by ``sigma``, is used
    by every cell, so differences between cells are not sampling noise.

    Recovery is linear in the gradients up to the anchoring shift, so each
    trial's noise is recovered once per setting and added, scaled, to the
    noise-free recovery of every harmonic.
    """
    n = zp.grid_size
    rows = []
    for st in settings:
        width = st.l
        noise_phi = []
        for t in range(mc.trials):
            g = noise_generator(mc.seed ^ t)
            ex = g.standard_normal((n, n))
            ey = g.standard_normal((n, n))
            noise_phi.append(recover_surface(GradientField(ex, ey),
                                             _with_anchor(st, 0.0)))
        for w in mc.harmonics:
            cfg = ZonePlateConfig(n, w, w)
            truth, grads = recovery_gradients(cfg, st.scheme)
            clean = recover_surface(grads, _with_anchor(st, float(truth.mean())))
            for sigma in mc.sigmas:
                acc_in = acc_b = 0.0
                for t in range(mc.trials):
                    est = clean + sigma * noise_phi[t] if sigma else clean
                    e_in, e_b = _region_errors(est, truth, width)
                    acc_in += e_in
                    acc_b += e_b
                rows.append({
                    "harmonic": w,
                    "sigma": sigma,
                    "scheme": st.scheme,
                    "l": st.l,
                    "P": _resolved_P(st),
                    "interior_nrmse": acc_in / mc.trials,
                    "boundary_nrmse": acc_b / mc.trials,
                    "trials": mc.trials,
                })
    rows.sort(key=lambda r: (r["harmonic"], r["sigma"], r["scheme"], r["l"]))
    return rows


def _with_anchor(st: RecoverySettings, mean: float) -> RecoverySettings:
    return RecoverySettings(st.scheme, st.l, st.P, st.tau, mean)


def _resolved_P(st: RecoverySettings) -> int:
    if st.P is not None:
        return st.P
    return 2 * st.l if st.scheme == "centralized" else 2 * st.l - 1


def noise_free_recovery(cfg: ZonePlateConfig, st: RecoverySettings) -> tuple[float, float]:
    """Interior and boundary NRMSE of recovering the zone plate exactly sampled."""
    truth, grads = recovery_gradients(cfg, st.scheme)
    phi = recover_surface(grads, _with_anchor(st, float(truth.mean())))
    return _region_errors(phi, truth, st.l)


# --------------------------------------------------------------------------- stitching


def flat_field(T, C_D, C_F) -> np.ndarray:
    """Flat-field correction ``(T - C_D) / (C_F - C_D)``."""
    T, C_D, C_F = (np.asarray(a, dtype=float) for a in (T, C_D, C_F))
    if not (T.shape == C_D.shape == C_F.shape):
        raise ValueError("tile and calibration frames must share a shape")
    span = C_F - C_D
    if np.any(span <= 0):
        raise DegenerateCalibration("flat frame must exceed dark frame everywhere")
    return (T - C_D) * (1.0 / span)


@dataclass(frozen=True)
class TileSet:
    """Non-overlapping tiles covering a canvas in row-major layout order.

    ``placements[k]`` is ``(row0, col0, rows, cols)`` of tile ``k``.
    """

    tiles: tuple[np.ndarray, ...]
    placements: tuple[tuple[int, int, int, int], ...]
    layout: tuple[int, int]
    canvas: tuple[int, int]
    biases: tuple[float, ...]
    noise_sigma: float = 0.0

    def __post_init__(self):
        cover = np.zeros(self.canvas, dtype=int)
        for t, (r0, c0, nr, nc) in zip(self.tiles, self.placements):
            if t.shape != (nr, nc):
                raise LayoutMismatch("tile shape disagrees with its placement")
            cover[r0:r0 + nr, c0:c0 + nc] += 1
        if len(self.tiles) != len(self.placements) or not np.all(cover == 1):
            raise LayoutMismatch("placements must partition the canvas")

    def assemble(self) -> np.ndarray:
        """Raw stitch: place each tile at its rectangle."""
        out = np.empty(self.canvas)
        for t, (r0, c0, nr, nc) in zip(self.tiles, self.placements):
            out[r0:r0 + nr, c0:c0 + nc] = t
        return out


def synth_tiles(ground_truth, layout: tuple[int, int], biases=None,
                noise_sigma: float = 0.0, seed: int = 0) -> TileSet:
    """Cut ``ground_truth`` into an even grid of tiles and perturb each one
    with its own constant bias and optional Gaussian noise."""
    truth = np.asarray(ground_truth, dtype=float)
    tr, tc = layout
    if tr < 1 or tc < 1 or truth.ndim != 2 or truth.shape[0] % tr or truth.shape[1] % tc:
        raise LayoutMismatch(f"layout {layout} does not divide canvas {truth.shape}")
    count = tr * tc
    biases = (0.0,) * count if biases is None else tuple(float(b) for b in biases)
    if len(biases) != count:
        raise LayoutMismatch(f"{len(biases)} biases for {count} tiles")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    nr, nc = truth.shape[0] // tr, truth.shape[1] // tc
    gen = noise_generator(seed)
    tiles, places = [], []
    for k in range(count):
        r0, c0 = (k // tc) * nr, (k % tc) * nc
        tile = truth[r0:r0 + nr, c0:c0 + nc] + biases[k]
        if noise_sigma:
            tile = tile + noise_sigma * gen.standard_normal((nr, nc))
        tiles.append(tile)
        places.append((r0, c0, nr, nc))
    return TileSet(tuple(tiles), tuple(places), (tr, tc), truth.shape, biases, float(noise_sigma))


def stitch_recover(tiles: TileSet, l_forward: int = 5, P_forward: int | None = None,
                   settings: RecoverySettings = RecoverySettings("staggered", 5),
                   reference=None) -> np.ndarray:
    """Gradient-domain stitch: differentiate each tile on its own, place the
    gradient tiles on the canvas and recover a single surface.

    Tiles are differentiated with staggered forward matrices, so the
    gradients sit on the half-nodes the staggered recovery expects.  The
    result is anchored to the mean of ``reference`` when given.
    """
    gx = np.empty(tiles.canvas)
    gy = np.empty(tiles.canvas)
    for t, (r0, c0, nr, nc) in zip(tiles.tiles, tiles.placements):
        Dx = build_matrix(MatrixScheme.STAGGERED_FORWARD, 1, l_forward, nc, P_forward)
        Dy = Dx if nr == nc else build_matrix(MatrixScheme.STAGGERED_FORWARD, 1, l_forward, nr, P_forward)
        gx[r0:r0 + nr, c0:c0 + nc] = partial_x(t, Dx)
        gy[r0:r0 + nr, c0:c0 + nc] = partial_y(t, Dy)
    mean = 0.0 if reference is None else float(np.mean(reference))
    return recover_surface(GradientField(gx, gy), _with_anchor(settings, mean))
