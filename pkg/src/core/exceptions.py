"""
Error hierarchy for the level set laboratory
All domain errors are ValueErrors so callers can catch them broadly
"""


class LevelSetError(ValueError):
    """Base class for every domain error raised by the laboratory"""


class GridError(LevelSetError):
    """Invalid grid specification or a query outside the valid region"""


class LevelRangeError(LevelSetError):
    """Requested level lies outside the range of the field"""


class ShapeError(LevelSetError):
    """Shape parameters describe an empty or unusable boundary"""


class MeanConvexityError(ShapeError):
    """Mean curvature is not positive where positivity is required"""


class ConfigError(LevelSetError):
    """Invalid evolution or analysis configuration"""


class SchemaError(ConfigError):
    """Scenario file could not be parsed; the message names the offending key"""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class NearSingularError(LevelSetError):
    """|grad u| fell below the floor at a point that must be regular"""

    def __init__(self, point, grad_norm: float, floor: float):
        self.point = point
        self.grad_norm = grad_norm
        self.floor = floor
        super().__init__(f"|grad u| = {grad_norm:.3e} below floor {floor:.3e} at {list(point)}")


class FrontExtinction(LevelSetError):
    """The level function has no zero set left; normal end of an evolution"""
