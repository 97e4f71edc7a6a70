"""Exception types shared across the toolkit."""


class RoamkitError(Exception):
    """Base class for all toolkit errors."""


class DegenerateDirectionError(RoamkitError):
    """Raised when a directional operation hits its singular set.

    Antipodal inputs do not define a unique rotation plane; callers are
    expected to perturb deterministically and retry.
    """


class ZeroVelocityError(RoamkitError):
    """Raised when the initial dynamics vanish away from the attractor."""


class PenetrationError(RoamkitError):
    """Raised when a query position lies inside an obstacle (gamma < 1)."""

    def __init__(self, obstacle_index, gamma, message=None):
        self.obstacle_index = obstacle_index
        self.gamma = gamma
        if message is None:
            message = (
                f"position penetrates obstacle {obstacle_index} "
                f"(gamma={gamma:.6g} < 1)"
            )
        super().__init__(message)


class OutsideInfluenceError(RoamkitError):
    """Raised when a cluster query falls outside every region of influence."""


class TrainingError(RoamkitError):
    """Raised when the learning pipeline cannot produce a valid model.

    Carries a ``stage`` label so CLI users can tell which pipeline step
    failed.
    """

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class ModelFormatError(RoamkitError):
    """Raised for unreadable or forward-incompatible model files."""
