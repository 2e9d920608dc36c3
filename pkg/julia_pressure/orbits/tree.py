"""
Backward-orbit trees with accumulated log-derivatives.

Level n holds the n-th preimages of the root, ordered parent-major, each
with log|(f^n)'(x)| accumulated along its branch. Trees are built level by
level; `iterate_levels` exposes the levels to callers that need partial
sums at every depth.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from julia_pressure.errors import BudgetExceeded, UnsafeBasepoint
from julia_pressure.orbits.regions import Region
from julia_pressure.orbits.sampling import is_safe_point
from julia_pressure.sphere.point import SpherePoint, as_complex
from julia_pressure.sphere.rational_map import RationalMap

logger = logging.getLogger(__name__)

DEFAULT_LEAF_BUDGET = 2_000_000


@dataclass
class TreeLevel:
    """One level of a backward tree."""

    n: int
    points: np.ndarray
    log_deriv: np.ndarray
    excluded: np.ndarray
    parents: np.ndarray
    pruned: int


@dataclass
class BackwardTree:
    """Leaves of f^-depth(root) with per-leaf log|(f^depth)'| and exclusion flags."""

    root: SpherePoint
    depth: int
    points: np.ndarray
    log_deriv: np.ndarray
    excluded: np.ndarray
    exclusion: Region = field(default_factory=Region.empty)
    strict: bool = False
    pruned: int = 0
    metric: str = "planar"
    paths: Optional[np.ndarray] = None

    @property
    def leaf_count(self) -> int:
        return int(self.points.size)

    @property
    def leaves(self) -> List[Tuple[SpherePoint, float, bool]]:
        return [(SpherePoint.from_complex(p), float(ld), bool(ex))
                for p, ld, ex in zip(self.points, self.log_deriv, self.excluded)]

    @property
    def kept(self) -> np.ndarray:
        return ~self.excluded

    def to_rows(self) -> List[Tuple[float, float, float, int]]:
        """CSV rows re, im, log_deriv, excluded."""
        return [(p.real, p.imag, float(ld), int(ex))
                for p, ld, ex in zip(self.points, self.log_deriv, self.excluded)]


def _expand(fmap: RationalMap, points: np.ndarray, log_deriv: np.ndarray, metric: str):
    d = fmap.degree
    children = fmap.preimages_array(points).reshape(-1)
    child_ld = np.repeat(log_deriv, d) + fmap.log_derivative_array(children, metric)
    return children, child_ld


def _expand_parallel(fmap: RationalMap, points: np.ndarray, log_deriv: np.ndarray,
                     metric: str, workers: int):
    if workers <= 1 or points.size < 2 * workers:
        return _expand(fmap, points, log_deriv, metric)
    chunks = np.array_split(np.arange(points.size), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda idx: _expand(fmap, points[idx], log_deriv[idx], metric), chunks))
    # chunks are contiguous, so concatenation keeps the parent-major order
    return np.concatenate([c for c, _ in parts]), np.concatenate([ld for _, ld in parts])


def check_budget(fmap: RationalMap, depth: int, leaf_budget: int) -> None:
    requested = fmap.degree ** depth
    if requested > leaf_budget:
        raise BudgetExceeded(requested, leaf_budget)


def iterate_levels(fmap: RationalMap, z, depth: int, exclude: Optional[Region] = None,
                   strict: bool = False, metric: str = "auto", workers: int = 1,
                   leaf_budget: int = DEFAULT_LEAF_BUDGET) -> Iterator[TreeLevel]:
    """
    Yield levels 0..depth of the backward tree of z.

    In terminal mode nodes inside `exclude` are flagged but still expanded;
    in strict mode they are pruned together with their subtrees.

    Args:
        fmap: The map
        z: Root
        depth: Last level
        exclude: Excluded region (None for none)
        strict: Prune whole branches entering the region
        metric: Derivative metric
        workers: Threads per level expansion
        leaf_budget: Maximum d^depth

    Yields:
        TreeLevel for n = 0, 1, ..., depth
    """
    check_budget(fmap, depth, leaf_budget)
    exclude = exclude or Region.empty()
    metric = fmap.resolve_metric(metric)
    zc = as_complex(z)
    if exclude.contains(zc):
        raise UnsafeBasepoint(f"basepoint {zc} lies in the excluded region")
    points = np.array([zc], dtype=complex)
    log_deriv = np.zeros(1)
    pruned = 0
    yield TreeLevel(0, points, log_deriv, np.zeros(1, dtype=bool), np.zeros(0, dtype=int), 0)
    d = fmap.degree
    for n in range(1, depth + 1):
        parents = np.repeat(np.arange(points.size), d)
        points, log_deriv = _expand_parallel(fmap, points, log_deriv, metric, workers)
        inside = exclude.contains_array(points)
        if strict:
            pruned += int(np.count_nonzero(inside))
            keep = ~inside
            points, log_deriv, parents = points[keep], log_deriv[keep], parents[keep]
            inside = np.zeros(points.size, dtype=bool)
        logger.debug(f"level {n}: {points.size} nodes, {int(np.count_nonzero(inside))} excluded, {pruned} pruned")
        yield TreeLevel(n, points, log_deriv, inside, parents, pruned)
        if points.size == 0:
            return


def backward_tree(fmap: RationalMap, z, depth: int, exclude: Optional[Region] = None,
                  strict: bool = False, metric: str = "auto", workers: int = 1,
                  leaf_budget: int = DEFAULT_LEAF_BUDGET, record_paths: bool = False,
                  check_safe: bool = True, beta: float = 0.5) -> BackwardTree:
    """
    Build the depth-n backward tree of z.

    Args:
        fmap: The map
        z: Root (must be a safe point outside `exclude`)
        depth: Tree depth n
        exclude: Excluded region V
        strict: Prune branches entering V instead of flagging leaves
        metric: Derivative metric
        workers: Threads per level
        leaf_budget: Maximum d^n
        record_paths: Keep, per leaf, the branch leaf, f(leaf), ..., root
        check_safe: Run the safe-point test first
        beta: Safe-point decay rate

    Returns:
        BackwardTree

    Raises:
        BudgetExceeded: d^n above the leaf budget
        UnsafeBasepoint: z fails the safe-point test or lies in V
    """
    check_budget(fmap, depth, leaf_budget)
    if check_safe:
        report = is_safe_point(fmap, z, horizon=max(depth, 1), beta=beta)
        if not report.safe:
            raise UnsafeBasepoint(f"basepoint {as_complex(z)} is not safe", report)
    exclude = exclude or Region.empty()
    nodes: List[np.ndarray] = []
    parent_links: List[np.ndarray] = []
    level = None
    for level in iterate_levels(fmap, z, depth, exclude, strict, metric, workers, leaf_budget):
        if record_paths:
            nodes.append(level.points)
            parent_links.append(level.parents)
    paths = None
    if record_paths and level.n == depth:
        paths = np.empty((level.points.size, depth + 1), dtype=complex)
        idx = np.arange(level.points.size)
        for j in range(depth + 1):
            paths[:, j] = nodes[depth - j][idx]
            if j < depth:
                idx = parent_links[depth - j][idx]
    if level.n < depth:
        empty = np.zeros(0)
        return BackwardTree(SpherePoint.from_complex(as_complex(z)), depth, empty.astype(complex), empty,
                            empty.astype(bool), exclude, strict, level.pruned, fmap.resolve_metric(metric))
    tree = BackwardTree(
        root=SpherePoint.from_complex(as_complex(z)),
        depth=depth,
        points=level.points,
        log_deriv=level.log_deriv,
        excluded=level.excluded,
        exclusion=exclude,
        strict=strict,
        pruned=level.pruned,
        metric=fmap.resolve_metric(metric),
        paths=paths,
    )
    logger.info(f"tree depth {depth}: {tree.leaf_count} leaves, {int(np.count_nonzero(tree.excluded))} "
                f"excluded, {tree.pruned} pruned")
    return tree
