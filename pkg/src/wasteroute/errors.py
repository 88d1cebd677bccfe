"""Exception hierarchy shared by every module of the package."""


class WasteRouteError(Exception):
    """Base class for all package errors."""


class SchemaError(WasteRouteError):
    """Serialized input does not match the expected structure."""


class InvariantViolation(WasteRouteError):
    """A structurally valid object breaks a semantic rule."""


class InfeasibleDemand(InvariantViolation):
    """Some micro-route carries more waste than one vehicle can hold."""


class WrongCaseKind(WasteRouteError):
    pass


class NameCollision(WasteRouteError):
    pass


class UnknownStop(WasteRouteError):
    pass


class MalformedRoute(WasteRouteError):
    """Route does not start and end at the depot, or repeats a stop back to back."""


class DuplicateMicroRoute(WasteRouteError):
    pass


class MissingMicroRoute(WasteRouteError):
    pass


class FractionalSolution(WasteRouteError):
    pass


class ConstraintViolation(WasteRouteError):
    def __init__(self, message, violated=()):
        super().__init__(message)
        self.violated = tuple(violated)


class DisconnectedTour(WasteRouteError):
    pass


class TooLarge(WasteRouteError):
    pass


class ConstructionFailed(WasteRouteError):
    pass


class InfeasibleInput(WasteRouteError):
    pass
