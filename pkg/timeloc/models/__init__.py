from timeloc.models.classical import ClassicalState, IntegratorConfig, PoincareSection, RingSystem, Trajectory
from timeloc.models.disorder import DriveCoefficients, DriveSpec, EffectiveDisorderCoefficients, LinePotential
from timeloc.models.effmodel import EffectiveModelSpec, EigenSolution, PlaneWaveBasis, SecondOrderCorrection
from timeloc.models.floquet import ComparisonReport, FloquetBasisWindow, LevelPair, QuasienergySpectrum, SecondOrderCheck
from timeloc.models.lattice import BandReport, ChainSpectrum, LatticeSpec, TightBindingChain
from timeloc.models.localization import BornInput, BornResult, LyapunovEstimate, TailFit

__all__ = [
    "BandReport", "BornInput", "BornResult", "ChainSpectrum", "ClassicalState", "ComparisonReport", "DriveCoefficients", "DriveSpec",
    "EffectiveDisorderCoefficients", "EffectiveModelSpec", "EigenSolution", "FloquetBasisWindow", "IntegratorConfig", "LatticeSpec",
    "LevelPair", "LinePotential", "LyapunovEstimate", "PlaneWaveBasis", "PoincareSection", "QuasienergySpectrum", "RingSystem",
    "SecondOrderCheck", "SecondOrderCorrection", "TailFit", "TightBindingChain", "Trajectory",
]  # fmt: skip
