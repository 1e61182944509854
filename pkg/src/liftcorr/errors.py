"""Exception hierarchy shared by every module of the workbench."""


class LiftCorrError(Exception):
    """Base class for all errors raised by liftcorr."""


class ElementNotInCarrier(LiftCorrError, ValueError):
    pass


class NotEnumerable(LiftCorrError):
    pass


class BudgetExceeded(LiftCorrError):
    def __init__(self, what, size, budget):
        super().__init__(f"{what}: {size} candidates exceeds budget {budget}")
        self.what = what
        self.size = size
        self.budget = budget


class NotALattice(LiftCorrError):
    pass


class MalformedTerm(LiftCorrError, ValueError):
    pass


class DistRequiresGrid(LiftCorrError):
    pass


class DistNotEnumerable(LiftCorrError):
    pass


class NotInGrammar(LiftCorrError):
    pass


class NotInGrammarG(NotInGrammar):
    pass


class ShapeMismatch(LiftCorrError, TypeError):
    pass


class InvalidPseudometric(LiftCorrError, ValueError):
    pass


class NotAMorphismOnY(LiftCorrError, ValueError):
    pass


class UnsupportedModalityForDist(LiftCorrError):
    pass


class NoWitnessRule(LiftCorrError):
    pass


class EmptySide(LiftCorrError, ValueError):
    pass


class NotWellBehaved(LiftCorrError):
    pass


class NotAdditive(LiftCorrError):
    pass


class DistributivityNotEstablished(LiftCorrError):
    pass


class ConditionNotEstablished(LiftCorrError):
    pass


class NotCoproductFree(LiftCorrError):
    pass


class NoConvergenceBound(LiftCorrError):
    pass


class IndexOutOfRange(LiftCorrError, IndexError):
    pass
