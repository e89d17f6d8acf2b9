import enum


class Quadrature(str, enum.Enum):
    X = "X"; Y = "Y"


class Sign(str, enum.Enum):
    PLUS = "+"; MINUS = "-"

    @property
    def factor(self) -> float:
        return 1.0 if self is Sign.PLUS else -1.0


class Verdict(str, enum.Enum):
    VIOLATED = "violated"; SATISFIED = "satisfied"; INCONCLUSIVE = "inconclusive"


class Preset(str, enum.Enum):
    FIG4 = "fig4"; FIG5 = "fig5"; FIG7 = "fig7"; FIG8 = "fig8"; FIG8_ASYM = "fig8-asym"
    SWAP = "swap"; CLASSICAL = "classical"; PHASE = "phase"; INTERFERE = "interfere"


class SweepParam(str, enum.Enum):
    SQUEEZING = "squeezing"; GAIN = "gain"; VISIBILITY = "visibility"


class CriteriaSet(str, enum.Enum):
    DUAN = "duan"; PPT = "ppt"; VLF = "vlf"; ALL = "all"
