"""Exception types shared across the package."""


class DensityError(ValueError):
    """A density could not be constructed from the given data."""


class NegativeDensity(DensityError):
    pass


class UnsortedAbscissae(DensityError):
    pass


class TooFewPoints(DensityError):
    pass


class NormalizationError(DensityError):
    pass


class InadmissibleDensity(DensityError):
    """A Fisher-based functional was requested for a density whose Fisher information is not finite."""


class NotConvergedError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance."""

    def __init__(self, result, what="integral"):
        self.result = result
        super().__init__(
            f"{what} did not converge: value={result.value!r}, "
            f"error estimate={result.error_estimate!r} after {result.subdivisions} subdivisions"
        )
