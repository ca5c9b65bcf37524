"""Shared-autonomy guidance: learned guide mixtures, potential-field haptic
cues, operator intent filtering and online replanning."""

from .field import GuidanceParams, PoseFieldGMM, build_pose_field, total_wrench
from .intent import BeliefState, FilterParams
from .learner import LearnerConfig, LearnerReport, learn_mixture, plan_for_scenario
from .promp import BasisConfig, GuideMixture, PhaseGrid, PoseGaussian, ProMP
from .scenarios import PRESETS, Scenario, episodic_reward, load_scenario, signed_distance
from .session import GuidanceFrame, Session, SessionConfig, preset_session_config

__all__ = [
    "BasisConfig",
    "BeliefState",
    "FilterParams",
    "GuidanceFrame",
    "GuidanceParams",
    "GuideMixture",
    "LearnerConfig",
    "LearnerReport",
    "PRESETS",
    "PhaseGrid",
    "PoseFieldGMM",
    "PoseGaussian",
    "ProMP",
    "Scenario",
    "Session",
    "SessionConfig",
    "build_pose_field",
    "episodic_reward",
    "learn_mixture",
    "load_scenario",
    "plan_for_scenario",
    "preset_session_config",
    "signed_distance",
    "total_wrench",
]
