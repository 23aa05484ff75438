"""Exception hierarchy shared by every stage.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
"""

USAGE_EXIT = 1
DATA_EXIT = 2
NUMERIC_EXIT = 3


class LipstdError(Exception):
    exit_code = NUMERIC_EXIT

    def __init__(self, message, column=None, **details):
        super().__init__(message)
        self.column = column
        self.details = details

    def with_column(self, column):
        # keep the first column name that was attached
        if self.column is None:
            self.column = column
        return self

    def __str__(self):
        message = super().__str__()
        if self.column is not None:
            return f"column '{self.column}': {message}"
        return message


class UsageError(LipstdError):
    exit_code = USAGE_EXIT


################################################ data errors ################################################

class DataError(LipstdError, ValueError):
    exit_code = DATA_EXIT


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message, column=column, row=row)
        self.row = row

    def __str__(self):
        where = []
        if self.row is not None:
            where.append(f"row {self.row}")
        if self.column is not None:
            where.append(f"column '{self.column}'")
        message = Exception.__str__(self)
        return f"{', '.join(where)}: {message}" if where else message


class DegenerateColumnError(DataError):
    def __init__(self, message, statistic=None, column=None):
        super().__init__(message, column=column, statistic=statistic)
        self.statistic = statistic


class SupportError(DataError):
    pass


class InvalidCategoryError(DataError):
    pass


class InvalidCountError(DataError):
    pass


class MetadataMismatchError(DataError):
    pass


################################################ numeric errors ################################################

class NumericError(LipstdError, ValueError):
    exit_code = NUMERIC_EXIT


class InvalidParameterError(NumericError):
    def __init__(self, message, field=None, column=None):
        super().__init__(message, column=column, field=field)
        self.field = field


class InvalidScaleError(NumericError):
    pass


class UnsupportedFamilyError(NumericError):
    pass


class StepUnderflowError(NumericError):
    pass


class InfeasibleTargetError(NumericError):
    def __init__(self, message, l1=None, column=None):
        super().__init__(message, column=column, l1=l1)
        self.l1 = l1


class NoRootError(NumericError):
    pass


class DivergenceError(NumericError):
    def __init__(self, message, iteration=None, column=None):
        super().__init__(message, column=column, iteration=iteration)
        self.iteration = iteration


class DegenerateNormalizationError(NumericError):
    pass


class DegenerateRangeError(NumericError):
    pass
