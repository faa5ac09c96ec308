"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input: bad CSV cell, unknown node, bad state."""


class FitError(RuntimeError):
    """Numerical estimation failed beyond recovery."""


class ZeroProbabilityEvidenceError(ValueError):
    """The supplied evidence assignment has probability zero under the model."""
