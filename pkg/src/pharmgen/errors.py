"""Exception types raised across the package."""


class PharmgenError(Exception):
    """Base class for all package-specific errors."""


# --- molecule I/O ---

class MalformedRecord(PharmgenError):
    def __init__(self, record: int, line: int, message: str):
        super().__init__(f"record {record}, line {line}: {message}")
        self.record = record
        self.line = line


class UnknownElement(PharmgenError):
    def __init__(self, record: int, line: int, symbol: str):
        super().__init__(f"record {record}, line {line}: unknown element {symbol!r}")
        self.record = record
        self.line = line
        self.symbol = symbol


class UnknownBondOrder(PharmgenError):
    def __init__(self, record: int, line: int, order: int):
        super().__init__(f"record {record}, line {line}: unsupported bond type {order}")
        self.record = record
        self.line = line
        self.order = order


class InvalidRange(PharmgenError):
    pass


# --- pharmacophores ---

class EmptySelection(PharmgenError):
    pass


class TooFewFeatures(PharmgenError):
    pass


class DegenerateHypothesis(PharmgenError):
    pass


# --- diffusion ---

class InvalidT(PharmgenError):
    pass


class InvalidNu(PharmgenError):
    pass


class TimestepOutOfRange(PharmgenError):
    pass


class ZeroNormalizer(PharmgenError):
    pass


# --- denoiser / training ---

class ShapeMismatch(PharmgenError):
    pass


class MaskOutOfRange(PharmgenError):
    pass


class EmptyMask(PharmgenError):
    pass


class NonFiniteActivation(PharmgenError):
    pass


class UnrecordedOperation(PharmgenError):
    pass


class EmptyDataset(PharmgenError):
    pass


class DivergedLoss(PharmgenError):
    pass


# --- sampling / evaluation ---

class TooFewAtoms(PharmgenError):
    pass


class CheckpointMismatch(PharmgenError):
    pass


class EmptyBatch(PharmgenError):
    pass


class EmptyInput(PharmgenError):
    pass


class TooFewMolecules(PharmgenError):
    pass
