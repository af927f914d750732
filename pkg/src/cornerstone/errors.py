"""Exception types raised across the package."""


class CornerstoneError(Exception):
    """Base class for all errors raised by cornerstone."""


class SpecError(CornerstoneError, ValueError):
    """Malformed decoupage description or run configuration.

    ``key`` names the offending entry so diagnostics can point at it.
    """

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class SampleNotOnAnyFace(CornerstoneError, ValueError):
    pass


class AmbientTooLarge(CornerstoneError, ValueError):
    pass


class NotComposable(CornerstoneError, ValueError):
    pass


class OnFaceWithoutFiber(CornerstoneError, ValueError):
    pass


class SignatureMismatch(CornerstoneError, ValueError):
    pass


class GridMismatch(CornerstoneError, ValueError):
    pass


class OrderTooHigh(CornerstoneError, ValueError):
    pass


class NotEquivariant(CornerstoneError, ValueError):
    def __init__(self, fibers, defect):
        self.fibers = fibers
        self.defect = defect
        super().__init__(
            f"family is not equivariant: fibers {fibers[0]!r} and {fibers[1]!r} "
            f"differ by {defect:.3e}"
        )


class NotStabilized(CornerstoneError, ValueError):
    pass


class EdgeLeakage(CornerstoneError, ValueError):
    pass


class InsufficientDecay(CornerstoneError, ValueError):
    pass


class CornerUndefined(CornerstoneError, ValueError):
    pass
