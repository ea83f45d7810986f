class CannError(Exception):
    """Base class for every pipeline error raised by the services."""


class DatasetError(CannError):
    pass


class RaggedRowError(DatasetError):
    def __init__(self, row: int, expected: int, found: int):
        self.row = row
        super().__init__(f"row {row}: expected {expected} fields, found {found}")


class SchemaMismatchError(DatasetError):
    pass


class EncodingError(DatasetError):
    pass


class DegenerateClassError(DatasetError):
    pass


class SplitError(DatasetError):
    pass


class DimensionMismatchError(CannError):
    pass


class NetworkShapeError(CannError):
    pass


class MeanTableError(CannError):
    pass


class ImportanceError(CannError):
    pass


class FingerprintMismatchError(ImportanceError):
    pass


class EvaluationError(CannError):
    pass
