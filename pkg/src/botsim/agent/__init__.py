from botsim.agent.action_list import ACTIONS, Action
from botsim.agent.backend import (
    DecisionRequest,
    DecisionResponse,
    RemoteBackend,
    StubBackend,
    Verdict,
    decide,
    parse_response,
)
from botsim.agent.knowledge import retrieve_knowledge, rewrite_knowledge
from botsim.agent.memory import Memory, retrieve_memory
from botsim.agent.planner import GoalTask, PlanItem, plan_goal
from botsim.agent.prompts import render_prompt
from botsim.agent.roles import sample_role
from botsim.agent.runner import RunResult, SimConfig, run_simulation
from botsim.agent.validate import parse_and_validate

__all__ = [
    "ACTIONS", "Action", "DecisionRequest", "DecisionResponse", "GoalTask", "Memory", "PlanItem",
    "RemoteBackend", "RunResult", "SimConfig", "StubBackend", "Verdict", "decide", "parse_and_validate",
    "parse_response", "plan_goal", "render_prompt", "retrieve_knowledge", "retrieve_memory",
    "rewrite_knowledge", "run_simulation", "sample_role",
]
