###############################################################################
# eddyprobe - Eddy-current inclusion detection and imaging simulator
#
# Copyright (c) 2026 The eddyprobe developers
# License: GNU Affero General Public License v3.0
# See LICENSE.txt for details about copyright and rights to use.
###############################################################################

import hashlib
import pathlib
import typing

# Requirements
import pydantic


FiniteFloat = typing.Annotated[float, pydantic.Field(allow_inf_nan=False)]
PositiveFloat = typing.Annotated[float, pydantic.Field(gt=0, allow_inf_nan=False)]
NonNegativeFloat = typing.Annotated[float, pydantic.Field(ge=0, allow_inf_nan=False)]
Probability = typing.Annotated[float, pydantic.Field(gt=0, lt=1)]
Point = tuple[FiniteFloat, FiniteFloat, FiniteFloat]


def _check_unit(vector):
    norm = sum(v * v for v in vector) ** 0.5
    if abs(norm - 1) > 1e-9:
        raise ValueError(f'must be a unit vector, got norm {norm}')
    return vector


UnitVector = typing.Annotated[Point, pydantic.AfterValidator(_check_unit)]


#
# Physical inputs
#

class InclusionModel(pydantic.BaseModel, frozen=True):
    z: Point
    alpha: PositiveFloat
    mu0: PositiveFloat
    mu_star: PositiveFloat
    sigma_star: PositiveFloat
    omega: PositiveFloat


class DerivedParams(pydantic.BaseModel, frozen=True):
    k: float
    nu: float
    skin_depth: float
    mu_ratio: float


class NoiseModel(pydantic.BaseModel, frozen=True):
    sigma_n: NonNegativeFloat
    seed: typing.Annotated[int, pydantic.Field(ge=0, lt=2**64)] = 0


#
# Results
#

class SpikedPrediction(pydantic.BaseModel, frozen=True):
    alpha_spike: float
    beta_spike: float
    predicted_sigma1: float
    regime: typing.Literal['subcritical', 'supercritical']


class DetectionOutcome(pydantic.BaseModel, frozen=True):
    R: float
    r_delta: float
    decision: bool
    delta: Probability
    sigma1_measured: float
    M: int
    N: int

    @pydantic.model_validator(mode='after')
    def _strict_alarm(self):
        if self.decision != (self.R > self.r_delta):
            raise ValueError('decision must be R > r_delta')
        return self


class StrengthEstimate(pydantic.BaseModel, frozen=True):
    c_hat: float
    residual_norm: NonNegativeFloat
    n_obs: int


class FrequencyFit(pydantic.BaseModel, frozen=True):
    sigma_hat: float
    alpha_hat: float
    objective: NonNegativeFloat


class MusicSummary(pydantic.BaseModel, frozen=True):
    argmax: Point
    refined_argmax: Point
    peak_value: float
    peak_to_median: float


#
# Scenario configuration
#

class InclusionConf(pydantic.BaseModel, extra='forbid', frozen=True):
    center: Point = (0.0, 0.0, 0.0)
    alpha: PositiveFloat = 0.01
    mu0: PositiveFloat = 1.2566e-6
    mu_star: PositiveFloat = 1.2566e-6
    sigma_star: PositiveFloat = 5.96e7
    omega: PositiveFloat = 133.5
    mode: typing.Literal['sphere', 'tensor'] = 'sphere'
    polarization: tuple[FiniteFloat, FiniteFloat] = (-0.4110, -0.0387)
    tensors: pathlib.Path | None = None
    m_table: pathlib.Path | None = None

    @pydantic.model_validator(mode='after')
    def _tensors_for_tensor_mode(self):
        if self.mode == 'tensor' and self.tensors is None:
            raise ValueError("tensor mode needs a 'tensors' file")
        return self


class ArrayConf(pydantic.BaseModel, extra='forbid', frozen=True):
    extent: tuple[FiniteFloat, FiniteFloat] = (-2.0, 2.0)
    source_count: typing.Annotated[int, pydantic.Field(ge=1)] = 16
    receiver_count: typing.Annotated[int, pydantic.Field(ge=1)] = 16
    height: FiniteFloat = 1.0
    p: UnitVector = (0.0, 0.0, 1.0)
    q: UnitVector = (0.0, 0.0, 1.0)

    @pydantic.field_validator('extent')
    @classmethod
    def _ordered_extent(cls, extent):
        if not extent[0] < extent[1]:
            raise ValueError('extent must be [low, high] with low < high')
        return extent


class NoiseConf(pydantic.BaseModel, extra='forbid', frozen=True):
    sigma_n: NonNegativeFloat | None = None
    ratio: PositiveFloat | None = None
    seed: typing.Annotated[int, pydantic.Field(ge=0, lt=2**64)] = 0
    acquisition: typing.Literal['hadamard', 'standard'] = 'hadamard'

    @pydantic.model_validator(mode='before')
    @classmethod
    def _default_ratio(cls, data):
        if isinstance(data, dict) and data.get('sigma_n') is None \
                and data.get('ratio') is None:
            data = dict(data, ratio=10.0)
        return data

    @pydantic.model_validator(mode='after')
    def _one_noise_level(self):
        if self.sigma_n is not None and self.ratio is not None:
            raise ValueError("give either 'sigma_n' or 'ratio', not both")
        return self


class DetectionConf(pydantic.BaseModel, extra='forbid', frozen=True):
    delta: Probability = 0.05
    trials: typing.Annotated[int, pydantic.Field(ge=1)] = 1000
    deltas: tuple[Probability, ...] = (0.01, 0.05, 0.10)
    ratios: tuple[PositiveFloat, ...] = (0.5, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0)
    workers: typing.Annotated[int, pydantic.Field(ge=1)] = 1


class ImagingConf(pydantic.BaseModel, extra='forbid', frozen=True):
    lower: Point = (-0.5, -0.5, -0.5)
    upper: Point = (0.5, 0.5, 0.5)
    resolution: typing.Annotated[int, pydantic.Field(ge=1)] = 21
    rank: typing.Annotated[int, pydantic.Field(ge=1)] | typing.Literal['auto'] = 3
    refine: bool = False
    stages: typing.Literal[1, 2] = 1

    @pydantic.model_validator(mode='after')
    def _ordered_box(self):
        if any(lo > hi for (lo, hi) in zip(self.lower, self.upper)):
            raise ValueError('lower corner must not exceed upper corner')
        return self


class TracyWidomConf(pydantic.BaseModel, extra='forbid', frozen=True):
    cache: pathlib.Path | None = None
    tolerance: typing.Annotated[float, pydantic.Field(gt=0, le=1e-6)] = 1e-10


class OutputConf(pydantic.BaseModel, extra='forbid', frozen=True):
    directory: pathlib.Path = pathlib.Path('_eddyprobe')
    loglevel: str = 'warning'


class ScenarioConfig(pydantic.BaseModel, extra='forbid', frozen=True):
    inclusion: InclusionConf = InclusionConf()
    array: ArrayConf = ArrayConf()
    noise: NoiseConf = NoiseConf()
    detection: DetectionConf = DetectionConf()
    imaging: ImagingConf = ImagingConf()
    tracy_widom: TracyWidomConf = TracyWidomConf()
    output: OutputConf = OutputConf()

    @property
    def seed(self):
        return self.noise.seed

    def digest(self):
        """SHA-256 of the canonical JSON dump (first 16 hex digits).

        Output settings and the table cache location do not take part.
        """
        dump = self.model_dump_json(exclude={'output': True,
                                             'tracy_widom': {'cache'}})
        return hashlib.sha256(dump.encode()).hexdigest()[:16]
