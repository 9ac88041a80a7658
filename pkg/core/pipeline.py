"""LangGraph orchestration: setup -> hypotheses -> profile -> scattering -> evans -> greens -> simulate.

Each stage reads the shared PipelineState and returns the keys it adds. The
stages of a run are chained in graph order; after every node a router jumps
to the next stage whose prerequisites completed, so a stage downstream of a
failure is never entered and is reported as skipped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

from langgraph.graph import END, StateGraph

from core.state import PipelineState

logger = logging.getLogger(__name__)

StageFn = Callable[[PipelineState], dict]


@dataclass
class Stage:
    name: str
    fn: StageFn
    requires: tuple[str, ...] = ()


@dataclass
class PipelineRun:
    state: PipelineState
    completed: list[str] = field(default_factory=list)
    failed: dict[str, str] = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed and not self.skipped


class Pipeline:
    def __init__(self, stages: list[Stage]) -> None:
        self.stages = {stage.name: stage for stage in stages}
        self.order = [stage.name for stage in stages]

    def closure(self, selected: list[str]) -> list[str]:
        """Selected stages plus everything they require, in graph order."""
        wanted: set[str] = set()
        stack = list(selected)
        while stack:
            name = stack.pop()
            if name not in self.stages:
                raise KeyError(f"unknown stage '{name}'")
            if name not in wanted:
                wanted.add(name)
                stack.extend(self.stages[name].requires)
        return [name for name in self.order if name in wanted]

    def _node(self, stage: Stage) -> StageFn:
        def node(state: PipelineState) -> dict:
            logger.info("Stage %s started", stage.name)
            try:
                updates = stage.fn(state) or {}
            except Exception as exc:
                logger.exception("Stage %s failed", stage.name)
                return {"failed": {stage.name: f"{type(exc).__name__}: {exc}"}}
            logger.info("Stage %s done", stage.name)
            return {**updates, "completed": [stage.name]}

        return node

    def _router(self, names: list[str], position: int) -> Callable[[PipelineState], str]:
        def route(state: PipelineState) -> str:
            done = set(state.get("completed", []))
            for name in names[position + 1 :]:
                missing = [req for req in self.stages[name].requires if req not in done]
                if not missing:
                    return name
                logger.warning("Skipping stage %s: prerequisite %s did not complete", name, ", ".join(missing))
            return "__end__"

        return route

    def build_graph(self, names: list[str]) -> StateGraph:
        """Chain the given stages; conditional edges skip stages with missing prerequisites."""
        graph = StateGraph(PipelineState)
        for name in names:
            graph.add_node(name, self._node(self.stages[name]))
        graph.set_entry_point(names[0])
        for position, name in enumerate(names):
            path_map = {later: later for later in names[position + 1 :]}
            path_map["__end__"] = END
            graph.add_conditional_edges(name, self._router(names, position), path_map)
        return graph

    def run(self, state: PipelineState, selected: list[str] | None = None) -> PipelineRun:
        names = self.closure(selected) if selected else list(self.order)
        first = self.stages[names[0]]
        if first.requires:
            raise KeyError(f"stage '{first.name}' needs {', '.join(first.requires)} before it")
        runnable = self.build_graph(names).compile()
        final = runnable.invoke(
            {**state, "completed": [], "failed": {}},
            config={"recursion_limit": 2 * len(names) + 2},
        )
        completed = list(final.get("completed", []))
        failed = dict(final.get("failed", {}))
        skipped = [name for name in names if name not in completed and name not in failed]
        return PipelineRun(state=final, completed=completed, failed=failed, skipped=skipped)
