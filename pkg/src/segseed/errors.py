"""Exception hierarchy. ``exit_code`` follows the CLI contract."""


class SegSeedError(Exception):
    exit_code = 3


class ConfigError(SegSeedError, ValueError):
    exit_code = 1


class PGMError(SegSeedError, ValueError):
    """Malformed PGM input. ``field`` names the offending header part."""

    exit_code = 2

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class DimensionMismatchError(SegSeedError, ValueError):
    exit_code = 2


class InvalidClassError(SegSeedError, ValueError):
    exit_code = 1


class InvalidBandError(ConfigError):
    pass


class SeedRejectedError(SegSeedError):
    """Seed outside the image or on a pixel another region already owns."""

    def __init__(self, message, class_code=None):
        super().__init__(message)
        self.class_code = class_code


class EmptyPoolError(SegSeedError):
    def __init__(self, class_code):
        super().__init__(f"empty candidate pool for class {class_code}")
        self.class_code = class_code


class InsufficientPeaksError(SegSeedError):
    pass
