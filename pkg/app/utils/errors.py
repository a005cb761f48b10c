class SpecvError(ValueError):
    """Base class for every domain error raised by the estimation library"""


class NonMonotoneScheme(SpecvError):
    pass


class DegenerateStep(SpecvError):
    pass


class BadGeometry(SpecvError):
    pass


class NotPSD(SpecvError):
    pass


class TooFewObservations(SpecvError):
    pass


class DegenerateDenominator(SpecvError):
    pass


class DegenerateInput(SpecvError):
    pass


class ToleranceNotMet(SpecvError):
    pass


class NonPositiveInputs(SpecvError):
    pass


class BadLag(SpecvError):
    pass


class WeightConstraintViolation(SpecvError):
    pass


class ConfigError(SpecvError):
    """Invalid experiment configuration

    Args:
        message (str): summary line
        fields (dict|None): field name -> diagnostic for every offending key
    """

    def __init__(self, message, fields=None):
        self.fields = dict(fields or {})
        if self.fields:
            details = "; ".join(f"{k}: {v}" for k, v in sorted(self.fields.items()))
            message = f"{message} ({details})"
        super().__init__(message)
