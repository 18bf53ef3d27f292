"""Exception and warning types shared across the package."""


class PfzerosError(Exception):
    """Base class. `exit_code` is what the CLI returns when this escapes."""

    exit_code = 5


class ConfigError(PfzerosError, ValueError):
    exit_code = 2


class DomainError(ConfigError):
    pass


class ResonanceError(PfzerosError, ArithmeticError):
    def __init__(self, k, lam):
        super().__init__(f"resonance: lambda^{k} = 1 for lambda = {lam}")
        self.k = k
        self.lam = lam


class DegreeZeroError(PfzerosError, ValueError):
    pass


class EmptySampleError(PfzerosError, ValueError):
    exit_code = 3


class NoBracket(PfzerosError, ValueError):
    def __init__(self, target, attained):
        lo, hi = attained
        super().__init__(f"target {target} outside attained range [{lo}, {hi}]")
        self.target = target
        self.attained = attained


class RealZeroOfH(PfzerosError, ValueError):
    pass


class DegenerateDirection(PfzerosError, ValueError):
    pass


class NotFixedPoint(PfzerosError, ValueError):
    pass


class EscapeError(PfzerosError, RuntimeError):
    def __init__(self, chain, step, value):
        super().__init__(f"chain {chain} escaped the domain at step {step}: {value!r}")
        self.chain = chain
        self.step = step
        self.value = value


class NoCycleDetected(PfzerosError, RuntimeError):
    pass


class CostGuard(PfzerosError, ValueError):
    exit_code = 2


class ToleranceFailure(PfzerosError):
    exit_code = 4


class NonDecreasingWarning(UserWarning):
    pass


class EdgeHypothesisWarning(UserWarning):
    """q does not vanish at the upper support edge."""


class ResonanceWarning(UserWarning):
    pass


class IllConditionedWarning(UserWarning):
    pass
