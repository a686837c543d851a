from .constants import FConstants
from .existential import existential_long_steps, solve_existential
from .implement import build_targets, choose_k, guess_partition, solve_full
from .long_steps import LongStepState, long_steps_forced, lsc_step
from .options import DegenerateRun, IterationLimit, SolveOptions
from .wallacher import solve_wallacher

__all__ = [
    "FConstants", "SolveOptions", "IterationLimit", "DegenerateRun", "LongStepState",
    "solve_wallacher", "solve_full", "solve_existential", "existential_long_steps", "lsc_step", "long_steps_forced",
    "guess_partition", "choose_k", "build_targets",
]
