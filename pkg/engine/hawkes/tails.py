"""
Heavy-tail analytics: Hawkes graph, class decomposition, tail-index propagation,
renewal systems and asymptotic tail coefficients
"""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd
from scipy.special import gamma as gamma_function

from .config import get_settings
from .enums import Process
from .exceptions import (
    DomainError,
    NotIrreducibleError,
    TailIndexOutOfScopeError,
    UnsupportedConfigurationError,
)
from .model import require_admissible, require_stable
from .quadrature import Grid, solve_volterra, trapezoid_convolution
from .schemas import ExponentialJump, HawkesModel, ParetoJump
from .transform import tabulate

logger = logging.getLogger(__name__)


# ============================================================================
# GRAPH AND CLASSES
# ============================================================================

@dataclass(frozen=True)
class HawkesGraph:
    """Edge j -> i whenever B_ij is not identically zero; gamma/C are NaN off Pareto edges"""
    d: int
    edges: FrozenSet[Tuple[int, int]]
    gamma: np.ndarray
    C: np.ndarray
    digraph: nx.DiGraph


@dataclass(frozen=True)
class ClassDecomposition:
    classes: Tuple[Tuple[int, ...], ...]   # in topological order of the condensation
    recurrent: Tuple[bool, ...]
    membership: Tuple[int, ...]            # vertex -> index into classes

    @property
    def irreducible(self) -> bool:
        return len(self.classes) == 1


@dataclass(frozen=True)
class TailIndexReport:
    reach: np.ndarray                              # reach[i, j] = P_{i<-j}
    delta: np.ndarray
    gamma_bar: np.ndarray
    sources: Tuple[Tuple[int, ...], ...]           # I_i
    paths: Dict[Tuple[int, int], Tuple[int, ...]]  # I_ij for j in I_i
    omega: np.ndarray

    def in_scope(self, i: int) -> bool:
        return bool(1 < self.gamma_bar[i] < 2)


def build_graph(model: HawkesModel) -> HawkesGraph:
    require_admissible(model)
    d = model.d
    digraph = nx.DiGraph()
    digraph.add_nodes_from(range(d))
    gamma = np.full((d, d), np.nan)
    C = np.full((d, d), np.nan)
    for i, j in model.edges():
        digraph.add_edge(j, i)
        jump = model.jump(i, j)
        if isinstance(jump, ParetoJump):
            gamma[i, j] = jump.gamma
            C[i, j] = jump.C
    gamma.setflags(write=False)
    C.setflags(write=False)
    return HawkesGraph(d=d, edges=frozenset(model.edges()), gamma=gamma, C=C, digraph=digraph)


def classify(graph: HawkesGraph) -> ClassDecomposition:
    """
    Strongly connected components in topological order of the condensation

    A class is recurrent when no edge leaves it. Ties in the topological order
    are broken by smallest member so class numbering is deterministic.
    """
    components = [tuple(sorted(c)) for c in nx.strongly_connected_components(graph.digraph)]
    condensed = nx.condensation(graph.digraph, scc=[set(c) for c in components])
    order = list(nx.lexicographical_topological_sort(condensed, key=lambda node: min(condensed.nodes[node]["members"])))

    classes = tuple(tuple(sorted(condensed.nodes[node]["members"])) for node in order)
    recurrent = tuple(condensed.out_degree(node) == 0 for node in order)
    membership = [0] * graph.d
    for index, members in enumerate(classes):
        for vertex in members:
            membership[vertex] = index
    return ClassDecomposition(classes=classes, recurrent=recurrent, membership=tuple(membership))


def reach_matrix(graph: HawkesGraph) -> np.ndarray:
    """reach[i, j] = 1 iff a directed path of length >= 1 runs from j to i"""
    closure = nx.transitive_closure(graph.digraph, reflexive=False)
    reach = np.zeros((graph.d, graph.d), dtype=int)
    for j, i in closure.edges():
        reach[i, j] = 1
    return reach


# ============================================================================
# TAIL INDICES
# ============================================================================

def _argmin_set(values: np.ndarray, rtol: float) -> Tuple[int, ...]:
    finite = np.isfinite(values)
    if not finite.any():
        return ()
    best = np.min(values[finite])
    return tuple(int(k) for k in np.flatnonzero(finite & (np.abs(values - best) <= rtol * abs(best))))


def omega(gamma_bar: float) -> float:
    """Gamma(1 - gamma) through the reflection formula, negative for gamma in (1, 2)"""
    return float(np.pi / (np.sin(np.pi * (1.0 - gamma_bar)) * gamma_function(gamma_bar)))


def tail_indices(model: HawkesModel, components: Optional[Sequence[int]] = None,
                 enforce_scope: bool = True) -> TailIndexReport:
    """
    Propagate jump tail indices along the Hawkes graph

    delta_ij is the smallest gamma_mj over targets m that equal i or reach i;
    gamma_bar_i = min_j delta_ij. Constant jumps take part in reachability but
    carry no tail index.

    Args:
        model: Admissible model
        components: Components whose tail index must lie in (1, 2); default all
        enforce_scope: Raise when a checked component is out of scope

    Returns:
        Report with reach, delta, gamma_bar, argmin sets and omega
    """
    graph = build_graph(model)
    unsupported = [(i, j) for i, j in sorted(graph.edges) if isinstance(model.jump(i, j), ExponentialJump)]
    if unsupported:
        raise UnsupportedConfigurationError(unsupported, "tail analysis needs Pareto or constant jumps on every edge")

    d = model.d
    rtol = get_settings().tie_rtol
    reach = reach_matrix(graph)
    gamma = np.where(np.isnan(graph.gamma), np.inf, graph.gamma)

    delta = np.full((d, d), np.inf)
    sources: List[Tuple[int, ...]] = []
    paths: Dict[Tuple[int, int], Tuple[int, ...]] = {}
    eligible = (reach + np.eye(d, dtype=int)) > 0   # eligible[i, m]: m = i or m reaches i
    for i in range(d):
        masked = np.where(eligible[i][:, None], gamma, np.inf)   # masked[m, j]
        delta[i] = masked.min(axis=0)
        best = _argmin_set(delta[i], rtol)
        sources.append(best)
        for j in best:
            paths[(i, j)] = _argmin_set(masked[:, j], rtol)

    gamma_bar = delta.min(axis=1)
    omegas = np.array([omega(g) if 1 < g < 2 else np.nan for g in gamma_bar])
    report = TailIndexReport(reach=reach, delta=delta, gamma_bar=gamma_bar, sources=tuple(sources),
                             paths=paths, omega=omegas)

    if enforce_scope:
        for i in range(d) if components is None else components:
            if not report.in_scope(i):
                raise TailIndexOutOfScopeError(i, float(gamma_bar[i]))
    return report


def class_table(decomposition: ClassDecomposition, report: Optional[TailIndexReport] = None) -> pd.DataFrame:
    """class_id, 1-based members, recurrent flag and gamma_bar (NaN without a report)"""
    rows = []
    for index, members in enumerate(decomposition.classes):
        rows.append({
            "class_id": index + 1,
            "members": " ".join(str(m + 1) for m in members),
            "recurrent": decomposition.recurrent[index],
            "gamma_bar": float(report.gamma_bar[members[0]]) if report is not None else np.nan,
        })
    return pd.DataFrame(rows, columns=["class_id", "members", "recurrent", "gamma_bar"])


# ============================================================================
# RENEWAL SYSTEMS
# ============================================================================

@dataclass(frozen=True)
class RenewalSolution:
    """
    Cluster first moments on a grid: RQ[k, i, j] is the expected number of
    component-i members present at age u_k of a cluster rooted in j, RL[k, i, j]
    the expected intensity it adds to component i. RQbar/RLbar hold the
    fractional-order systems, filled only in columns j of I_i.
    """
    grid: Grid
    RQ: np.ndarray
    RL: np.ndarray
    RQbar: Optional[np.ndarray] = None
    RLbar: Optional[np.ndarray] = None
    sources: Optional[Tuple[Tuple[int, ...], ...]] = None

    def integrals(self, process: Process = Process.Q) -> np.ndarray:
        values = self.RL if Process(process) is Process.LAMBDA else self.RQ
        return self.grid.integrate(values, axis=0)

    def fractional_integrals(self, process: Process = Process.Q) -> np.ndarray:
        values = self.RLbar if Process(process) is Process.LAMBDA else self.RQbar
        if values is None:
            raise DomainError("RenewalSolution", "fractional systems have not been solved")
        return self.grid.integrate(values, axis=0)


def _branching_weights(model: HawkesModel, kernel: np.ndarray) -> np.ndarray:
    return kernel * model.mean_jumps()[None, :, :]


def solve_renewal(model: HawkesModel, grid: Grid) -> RenewalSolution:
    """
    Time-domain solve of the renewal systems for R^Q and R^lambda

        R^Q_ij(u) = 1{i=j} P(J_i > u) + sum_m E[B_mj] (g_mj * R^Q_im)(u)

    and the same with forcing E[B_ij] g_ij(u) for R^lambda. Every target row i
    shares the per-step matrix, so all rows advance together.
    """
    require_stable(model, "solve_renewal")
    tables = tabulate(model, grid)
    weights = _branching_weights(model, tables.kernel)

    d = model.d
    forcing_Q = np.zeros((grid.n + 1, d, d))
    forcing_Q[:, np.arange(d), np.arange(d)] = tables.survival
    RQ = solve_volterra(forcing_Q, weights, grid.h)
    RL = solve_volterra(weights, weights, grid.h)
    logger.debug(f"Renewal systems solved on {grid.n} steps over [0, {grid.t}]")
    return RenewalSolution(grid=grid, RQ=np.maximum(RQ, 0.0), RL=np.maximum(RL, 0.0))


def solve_renewal_fractional(model: HawkesModel, grid: Grid, base: RenewalSolution, report: TailIndexReport,
                             components: Optional[Sequence[int]] = None) -> RenewalSolution:
    """
    Fractional-order renewal systems driving the tail coefficients

    For target i with delta = gamma_bar_i and I = I_i, for j in I:

        Rbar_ij(u) = sum_{m in I} E[B_mj] (g_mj * Rbar_im)(u)
                     + sum_{m in I_ij} C_mj ((g_mj * R_im)(u))^delta

    The intensity variant adds C_ij g_ij(u)^delta when i itself attains the
    minimum. Stored solutions carry no omega factor.
    """
    weights = _branching_weights(model, tabulate(model, grid).kernel)
    targets = range(model.d) if components is None else components

    RQbar = np.zeros_like(base.RQ)
    RLbar = np.zeros_like(base.RL)
    for i in targets:
        I = list(report.sources[i])
        subweights = weights[:, I][:, :, I]
        forcing_Q, forcing_L = fractional_forcing(model, grid, base, report, i)
        RQbar[:, i, I] = np.maximum(solve_volterra(forcing_Q[:, None, :], subweights, grid.h)[:, 0, :], 0.0)
        RLbar[:, i, I] = np.maximum(solve_volterra(forcing_L[:, None, :], subweights, grid.h)[:, 0, :], 0.0)

    return RenewalSolution(grid=grid, RQ=base.RQ, RL=base.RL, RQbar=RQbar, RLbar=RLbar, sources=report.sources)


def fractional_forcing(model: HawkesModel, grid: Grid, base: RenewalSolution, report: TailIndexReport,
                       i: int) -> Tuple[np.ndarray, np.ndarray]:
    """Forcing columns (n+1, |I_i|) of the Q and lambda fractional systems of target i"""
    if not report.in_scope(i):
        raise TailIndexOutOfScopeError(i, float(report.gamma_bar[i]))
    kernel = tabulate(model, grid).kernel
    graph_C = build_graph(model).C
    delta = float(report.gamma_bar[i])
    I = report.sources[i]

    smoothed_Q = np.maximum(trapezoid_convolution(kernel, base.RQ[:, i, :, None], grid.h), 0.0)
    smoothed_L = np.maximum(trapezoid_convolution(kernel, base.RL[:, i, :, None], grid.h), 0.0)
    forcing_Q = np.zeros((grid.n + 1, len(I)))
    forcing_L = np.zeros((grid.n + 1, len(I)))
    for col, j in enumerate(I):
        for m in report.paths[(i, j)]:
            forcing_Q[:, col] += graph_C[m, j] * smoothed_Q[:, m, j] ** delta
            forcing_L[:, col] += graph_C[m, j] * smoothed_L[:, m, j] ** delta
            if m == i:
                forcing_L[:, col] += graph_C[i, j] * kernel[:, i, j] ** delta
    return forcing_Q, forcing_L


# ============================================================================
# ASYMPTOTES
# ============================================================================

@dataclass(frozen=True)
class TailAsymptote:
    """P(X > x) ~ coefficient * x^(-gamma_bar)"""
    component: int
    process: Process
    t: float
    coefficient: float
    gamma_bar: float

    def __call__(self, x):
        return self.coefficient * np.asarray(x, dtype=float) ** (-self.gamma_bar)


def _solution_for(model: HawkesModel, t: float, process: Process, grid_steps: Optional[int],
                  components: Sequence[int]) -> Tuple[RenewalSolution, TailIndexReport, HawkesModel]:
    if not (np.isfinite(t) and t > 0):
        raise DomainError("tail_asymptote", f"t must be positive (got {t})")
    process = Process(process)
    working = model.with_infinite_sojourns() if process is Process.N else model
    report = tail_indices(working, components)
    grid = Grid(t, grid_steps or get_settings().grid_steps)
    base = solve_renewal(working, grid)
    return solve_renewal_fractional(working, grid, base, report, components), report, working


def tail_asymptote(model: HawkesModel, t: float, i: int, process: Process = Process.Q,
                   grid_steps: Optional[int] = None) -> TailAsymptote:
    """
    Coefficient sum_{j in I_i} lambda_j,inf int_0^t Rbar_ij(u) du of the power-law tail of component i

    For N the sojourns are taken infinite, so N is Q without departures.
    """
    if not 0 <= i < model.d:
        raise DomainError("tail_asymptote", f"component {i} outside [0, {model.d})")
    process = Process(process)
    solution, report, working = _solution_for(model, t, process, grid_steps, [i])
    integrals = solution.fractional_integrals(Process.LAMBDA if process is Process.LAMBDA else Process.Q)
    I = list(report.sources[i])
    coefficient = float(np.dot(working.base_rates[I], integrals[i, I]))
    logger.info(f"Tail asymptote of {process.value}_{i + 1}({t}): {coefficient:.6g} x^-{report.gamma_bar[i]:.4g}")
    return TailAsymptote(component=i, process=process, t=t, coefficient=coefficient,
                         gamma_bar=float(report.gamma_bar[i]))


def linear_combination_tail(model: HawkesModel, t: float, c, grid_steps: Optional[int] = None) -> TailAsymptote:
    """
    Tail of sum_i c_i Q_i(t) for an irreducible Hawkes graph

    The coefficient is sum_i c_i^gamma times the marginal coefficient of Q_i.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (model.d,) or np.any(c < 0):
        raise DomainError("linear_combination_tail", f"c must be a non-negative vector of length {model.d}")
    decomposition = classify(build_graph(model))
    if not decomposition.irreducible:
        raise NotIrreducibleError(len(decomposition.classes))

    components = list(range(model.d))
    solution, report, working = _solution_for(model, t, Process.Q, grid_steps, components)
    integrals = solution.fractional_integrals(Process.Q)
    gamma_bar = float(report.gamma_bar[0])
    marginals = np.array([np.dot(working.base_rates[list(report.sources[i])], integrals[i, list(report.sources[i])])
                          for i in components])
    coefficient = float(np.sum(c ** gamma_bar * marginals))
    return TailAsymptote(component=-1, process=Process.Q, t=t, coefficient=coefficient, gamma_bar=gamma_bar)
