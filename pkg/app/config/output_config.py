import enum


class OutputFormat(enum.Enum):
    HUMAN = "human"
    JSON = "json"


class ExitCode(enum.IntEnum):
    VERDICT = 0
    INPUT_ERROR = 1
    UNKNOWN = 2
    # verify rejected a certificate or a corpus case missed its expected verdict
    REJECTED = 1
