import numpy as np
from weighting.models import ExponentReport


def _strictly_above(alpha, bound):
    return bool(np.all(alpha > bound))


def _practice_check(spec, alpha, eta0):
    """(passed, binding constraint, required minimum) for the score-matching assumptions."""
    a, b = spec.a, spec.b

    if spec.mode == "centered":
        if a > 0:
            bound = max(0.0, 1.0 - a)
            return _strictly_above(alpha, bound), f"eta=0 known, a>0: alpha_j > max(0, 1-a) = {bound:g}", bound
        return bool(np.all(alpha >= 0)), "eta=0 known, a=0: alpha_j >= 0", 0.0

    if a > 0 and b > 0:
        bound = max(0.0, 1.0 - a, 1.0 - b)
        return _strictly_above(alpha, bound), f"a>0, b>0: alpha_j > max(0, 1-a, 1-b) = {bound:g}", bound

    if a > 0:
        if eta0 is None:
            return True, "a>0, b=0: alpha_j > 1 - eta0_j (eta0 not supplied, unchecked)", None
        bounds = 1.0 - np.asarray(eta0, dtype=float)
        return _strictly_above(alpha, bounds), f"a>0, b=0: alpha_j > 1 - eta0_j (max {bounds.max():g})", float(bounds.max())

    return bool(np.all(alpha >= 0)), "a=0: alpha_j >= 0", 0.0


def _theory_check(spec, alpha, eta0):
    """Stricter conditions used by the consistency theory."""
    if spec.mode == "am1":
        if eta0 is not None:
            eta0 = np.asarray(eta0, dtype=float)
            m = eta0.shape[0]
            if eta0.sum() + m < 0:
                # only the K PSD, eta > -1 route remains
                bounds = np.maximum(1.0 - eta0, 1.0 - eta0[-1])
                return _strictly_above(alpha, bounds), f"A^(m-1), 1'eta0 + m < 0: alpha_j > max(1-eta0_j, 1-eta0_m)"
        return _strictly_above(alpha, 0.0), "A^(m-1): alpha_j > 0"

    if spec.a > 0:
        bound = max(1.0, 2.0 - spec.a, 2.0 - spec.b)
        return bool(np.all(alpha >= bound)), f"a>0: alpha_j >= max(1, 2-a, 2-b) = {bound:g}"
    return bool(np.all(alpha >= 0)), "a=0: alpha_j >= 0"


def validate_h_exponents(spec, weights, eta0=None):
    """
    Report whether the power weights h_j(x) = x^alpha_j satisfy the
    score-matching assumptions (`passed`) and the stricter exponent range of
    the consistency theory (`theory_passed`). Only the free coordinates matter,
    but a common exponent is checked on all m entries.
    """
    alpha = np.asarray(weights.alpha, dtype=float)
    passed, binding, minimum = _practice_check(spec, alpha, eta0)
    theory_passed, theory_binding = _theory_check(spec, alpha, eta0)
    return ExponentReport(
        passed=passed,
        theory_passed=passed and theory_passed,
        binding_constraint=binding,
        details=f"theory grade: {theory_binding}",
        required_minimum=minimum,
    )
