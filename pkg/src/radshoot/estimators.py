"""Estimator-style wrappers around the shooting scan and the chain tuner.

Both follow the scikit-learn conventions: constructor arguments are stored
untouched, ``fit`` validates them and sets trailing-underscore attributes,
and ``get_params``/``set_params`` come from ``BaseEstimator``.  ``X`` is a
column of initial values.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_alphas, check_positive, check_tolerances
from .nonlinearity import BaseModel, BlockSpec, compile_nonlinearity, make_kind
from .odeint import SolverControls
from .shooting import (TAG_N, TAG_P, TAG_UNDETERMINED, classify, find_alpha_star,
                       scan_ground_states)
from .tuning import tune_chain


def _controls(est) -> SolverControls:
    rel, abs_ = check_tolerances(est.rel_tol, est.abs_tol)
    return SolverControls(rel, abs_, check_positive(est.r_max, "r_max"))


class GroundStateShooter(ClassifierMixin, BaseEstimator):
    """Locate ground states of a block nonlinearity and tag initial values.

    Parameters
    ----------
    p : float, default=2.0
        Exponent of the base model ``s**p - s``.
    N : int, default=4
        Dimension.
    blocks : sequence of BlockSpec or dict, default=()
    gamma : float, default=inf
    rel_tol, abs_tol, r_max : float
        Integrator controls.
    alpha_max : float, optional
        Upper end of the scan; ``2 * max(alpha_*, top block start)`` if omitted.
    scan_step : float, optional
    tol : float, default=1e-10
        Bracket width.
    expected : int, optional
        Bracket count hint; a shortfall triggers one refined scan.
    n_jobs : int, optional

    Attributes
    ----------
    nonlinearity_ : PiecewiseNonlinearity
    brackets_ : list of GroundStateBracket
    ground_states_ : ndarray
        Bracket midpoints.
    alpha_star_ : float
        First (lowest) ground state.
    classes_ : ndarray
        ``["N", "P", "Undetermined"]``.
    scan_ : ScanResult
    """

    def __init__(self, p=2.0, N=4, blocks=(), gamma=math.inf, rel_tol=1e-10, abs_tol=1e-12,
                 r_max=1e3, alpha_max=None, scan_step=None, tol=1e-10, expected=None,
                 n_jobs=None):
        self.p = p
        self.N = N
        self.blocks = blocks
        self.gamma = gamma
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.r_max = r_max
        self.alpha_max = alpha_max
        self.scan_step = scan_step
        self.tol = tol
        self.expected = expected
        self.n_jobs = n_jobs

    def _build(self):
        base = BaseModel(float(self.p), int(self.N))
        specs = [b if isinstance(b, BlockSpec) else BlockSpec.from_dict(b) for b in self.blocks]
        return compile_nonlinearity(base, specs, float(self.gamma))

    def fit(self, X=None, y=None):
        """Scan for ground states.

        Parameters
        ----------
        X : array-like of shape (n,) or (n, 1), optional
            Extra scan points added to the uniform grid.
        y : ignored
        """
        ctl = _controls(self)
        check_positive(self.tol, "tol", max_val=1.0)
        nl = self._build()
        seeds = () if X is None else tuple(check_alphas(X))
        if self.alpha_max is None:
            a_star = find_alpha_star(nl, tol=self.tol, controls=ctl).midpoint
            top = max([a_star] + [b.start for b in nl.blocks])
            alpha_max = 2.0 * top
            if math.isfinite(nl.gamma):
                alpha_max = min(alpha_max, 0.5 * (top + nl.gamma))
        else:
            alpha_max = check_positive(self.alpha_max, "alpha_max")
        self.scan_ = scan_ground_states(nl, alpha_max, self.scan_step, self.tol, ctl,
                                        expected=self.expected, seeds=seeds,
                                        n_jobs=self.n_jobs)
        self.nonlinearity_ = nl
        self.brackets_ = list(self.scan_.brackets)
        self.ground_states_ = np.array([b.midpoint for b in self.brackets_])
        self.alpha_star_ = float(self.ground_states_[0]) if self.brackets_ else math.nan
        self.classes_ = np.array([TAG_N, TAG_P, TAG_UNDETERMINED])
        return self

    def predict(self, X) -> np.ndarray:
        """Tag of the shot from every initial value in ``X``."""
        check_is_fitted(self, "nonlinearity_")
        alphas = check_alphas(X)
        ctl = _controls(self)
        return np.array([classify(self.nonlinearity_, a, ctl).tag for a in alphas],
                        dtype=object)


class ChainTuner(BaseEstimator):
    """Tune an alternating ``k``-block chain above the base model.

    Parameters
    ----------
    p : float, default=2.0
    N : int, default=4
    k : int, default=4
        Target number of ground states.
    kind : dict, default=None
        Block kind for every tuned block, ``{"kind": "power", "q": 2.0}`` if
        omitted.
    rel_tol, abs_tol, r_max : float
    tol : float, default=1e-10
    verify : bool, default=True
        Scan the tuned chain for its brackets.

    Attributes
    ----------
    tuning_ : ChainTuning
    alphas_ : dict
        ``{i: alpha_i}`` for ``i = 1 .. k``.
    brackets_ : list of GroundStateBracket
    nonlinearity_ : PiecewiseNonlinearity
    """

    def __init__(self, p=2.0, N=4, k=4, kind=None, rel_tol=1e-10, abs_tol=1e-12, r_max=1e3,
                 tol=1e-10, verify=True):
        self.p = p
        self.N = N
        self.k = k
        self.kind = kind
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.r_max = r_max
        self.tol = tol
        self.verify = verify

    def fit(self, X=None, y=None):
        ctl = _controls(self)
        k = check_positive(self.k, "k", integer=True, min_val=2, include_boundaries="left")
        kind = make_kind(self.kind or {"kind": "power", "q": 2.0})
        base = BaseModel(float(self.p), int(self.N))
        self.tuning_ = tune_chain(base, [kind], k, ctl, verify=bool(self.verify), tol=self.tol)
        self.alphas_ = self.tuning_.alphas()
        self.brackets_ = list(self.tuning_.brackets)
        self.nonlinearity_ = self.tuning_.nonlinearity()
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "tuning_")
        ctl = _controls(self)
        return np.array([classify(self.nonlinearity_, a, ctl).tag for a in check_alphas(X)],
                        dtype=object)
