from botsim.detect.data import GraphDataset, TrainConfig, standardize
from botsim.detect.experiments import DEFAULT_PS, perturb_edges, perturbation_sweep, run_seeds
from botsim.detect.llm_eval import llm_text_eval
from botsim.detect.metrics import EvalReport, score
from botsim.detect.models import LogReg, Propagation, RGCNLite, train_logreg, train_rgcn

evaluate = score
rgcn_lite_train = train_rgcn

__all__ = [
    "DEFAULT_PS", "EvalReport", "GraphDataset", "LogReg", "Propagation", "RGCNLite", "TrainConfig",
    "evaluate", "llm_text_eval", "perturb_edges", "perturbation_sweep", "rgcn_lite_train", "run_seeds",
    "score", "standardize", "train_logreg", "train_rgcn",
]
