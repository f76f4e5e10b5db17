"""Knowledge-graph reasoning paths, rationale synthesis and alignment training."""

import json as _json

from . import _kgrat
from ._kgrat import (
    ConfigError,
    EntityLookupError,
    KnowledgeGraph,
    LoadError,
    NumericError,
    ShapeError,
    build_factcheck_prompt,
    build_rationale_prompt,
    kl_loss,
    link,
    load_graph_file,
    load_graph_text,
)

__all__ = [
    "ConfigError",
    "EntityLookupError",
    "KnowledgeGraph",
    "LoadError",
    "NumericError",
    "ShapeError",
    "bench",
    "build_factcheck_prompt",
    "build_rationale_prompt",
    "find_paths",
    "kl_loss",
    "link",
    "load_graph_file",
    "load_graph_text",
    "synthesize",
    "train_reference",
]


def find_paths(graph, start, goal, *, max_paths=3, max_depth=3, use_heuristic=True,
               anchors=10, seed=0, fallback=False):
    """Cheapest loopless paths between two entity labels, as a report dict."""
    return _json.loads(_kgrat.find_paths(graph, start, goal, max_paths, max_depth,
                                        use_heuristic, anchors, seed, fallback))


def synthesize(graph, qa, *, seed=0, jobs=4, use_heuristic=True):
    """Offline rationale records for QA dicts (or a JSONL string)."""
    if not isinstance(qa, str):
        qa = "".join(_json.dumps(q) + "\n" for q in qa)
    return _json.loads(_kgrat.synthesize(graph, qa, seed, jobs, use_heuristic))


def bench(nodes=1000, queries=100, *, seed=7, max_paths=3, max_depth=3, oracle=False,
          tiny_graphs=0):
    return _json.loads(_kgrat.bench(nodes, queries, seed, max_paths, max_depth, oracle,
                                   tiny_graphs))


def train_reference(seed=7, steps=500, lr=0.1, *, data=None, grad_check=False):
    """Pretrain a frozen q, then align a fresh p to it; returns the loss trace and agreement."""
    if data is None:
        data = ""
    elif not isinstance(data, str):
        data = "".join(_json.dumps(r) + "\n" for r in data)
    return _json.loads(_kgrat.train_reference(seed, steps, lr, data, grad_check))
