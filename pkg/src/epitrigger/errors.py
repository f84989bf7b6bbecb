"""Exception types shared across the package."""


class EpitriggerError(Exception):
    """Base class for all package errors."""


class ConfigError(EpitriggerError):
    """A config document (or parameter set) is invalid; message says which key/line."""


class DegeneratePopulationError(ConfigError):
    """Population or seeding values that make the scenario meaningless."""


class NumericalInstabilityError(EpitriggerError):
    """The integration left the physically meaningful region; message names the time."""


class CannotSeedAwarenessError(EpitriggerError):
    """Fewer than one susceptible left at the moment awareness should be seeded."""


class InvalidPrevalenceError(EpitriggerError):
    """A prevalence series contains values outside [0, 1] or negative test counts."""
