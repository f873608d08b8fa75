# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Exception classes.

    Every error derives from a builtin exception, so callers that only care
    about the broad category can keep catching ValueError and friends.
"""


class DatasetError(ValueError):
    """ Base class for problems with the contents of a dataset """
    pass


class EmptyDatasetError(DatasetError):

    def __init__(self, msg="empty dataset"):
        super().__init__(msg)


class SchemaMismatchError(DatasetError):

    """ Column names do not match the expected schema.

    ``columns`` lists the offending column names.
    """

    def __init__(self, msg, columns=()):
        super().__init__(msg)
        self.columns = tuple(columns)


class CSVParseError(DatasetError):

    """ A data cell could not be read as a finite real number, or a row has
    the wrong number of fields.

    ``row`` is the 1-based data row (the header is not counted) and
    ``column`` the column name, or None when the whole row is malformed.
    """

    def __init__(self, row, column, value, msg=None):
        if msg is None:
            msg = ("cannot parse %r as a finite number at row %d, column %r"
                   % (value, row, column))
        super().__init__(msg)
        self.row = row
        self.column = column
        self.value = value


class ModeError(ValueError):
    """ A model was used in a mode it was not fitted for """
    pass


class FingerprintMismatchError(ValueError):
    """ Data does not match the fingerprint recorded with a model """
    pass


class OOBCoverageError(ValueError):

    """ A training sample is in-bag for every tree of a forest """

    def __init__(self, index):
        super().__init__(
            "sample %d is not out-of-bag for any tree; "
            "fit the forest with more trees" % index)
        self.index = index


class PredictionError(RuntimeError):

    """ A prediction function failed on a particular sample """

    def __init__(self, index, cause):
        if index is None:
            msg = "prediction failed: %s" % (cause,)
        else:
            msg = "prediction failed for sample %d: %s" % (index, cause)
        super().__init__(msg)
        self.index = index


class ConfigError(ValueError):

    """ Invalid configuration; ``field`` names the offending key """

    def __init__(self, field, msg, problems=None):
        self.problems = list(problems) if problems else [(field, msg)]
        super().__init__("; ".join("%s: %s" % p for p in self.problems))
        self.field = field

    @classmethod
    def collect(cls, problems):
        """ One error reporting every (field, message) pair """
        field, msg = problems[0]
        return cls(field, msg, problems)


class StageError(RuntimeError):

    """ A step of a multi-stage run failed; ``stage`` names the step """

    def __init__(self, stage, cause):
        super().__init__("%s: %s" % (stage, cause))
        self.stage = stage
        self.cause = cause
