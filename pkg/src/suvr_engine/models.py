from enum import StrEnum
from typing import Literal

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator

from suvr_engine.neighbors import Strategy


class ResetPolicy(StrEnum):
    EVERY_STEP = "every-step"
    EVERY_EPOCH = "every-epoch"
    NEVER = "never"


class TrainConfig(BaseModel):
    """Hyperparameters of one SUVR training run"""

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    strategy: Strategy = Field(
        Strategy.GREEDY, description="Neighbor discovery strategy: bfs, dfs or greedy"
    )
    k: int = Field(4, ge=1, description="Number of neighbors explored per query")
    negatives: int | None = Field(
        None,
        ge=0,
        description="Hard negatives carved from the k neighbors (unset: min(ceil(k/2), k-1))",
    )
    extra_negatives: int = Field(
        0, ge=0, description="Extra negatives drawn uniformly from the whole bank"
    )
    tau: float = Field(0.07, gt=0, description="Softmax temperature")
    epochs: int = Field(50, ge=0, description="Number of training epochs")
    batch_size: int = Field(32, ge=1, description="Instances per optimization step")
    base_lr: float = Field(0.03, gt=0, description="Initial learning rate")
    lr_decay: float = Field(
        0.9, gt=0, le=1, description="Learning-rate multiplier applied every lr_decay_every epochs"
    )
    lr_decay_every: int = Field(40, ge=1, description="Epochs between learning-rate decays")
    nesterov_mu: float = Field(0.9, ge=0, lt=1, description="Nesterov momentum coefficient")
    momentum: float = Field(0.5, ge=0, le=1, description="Memory bank EMA momentum")
    reset_policy: ResetPolicy = Field(
        ResetPolicy.EVERY_STEP,
        description="When neighbor sets are recomputed: every-step, every-epoch or never",
    )
    warmup_epochs: int = Field(
        0, ge=0, description="Leading epochs that train the instance term only"
    )
    d: int = Field(64, ge=1, description="Embedding dimension")
    hidden_dims: list[int] = Field(
        default_factory=lambda: [64], description="Hidden layer widths of the encoder"
    )
    seed: int = Field(0, ge=0, description="Seed for every random draw of the run")

    @model_validator(mode="after")
    def _check_negatives(self):
        if self.negatives is not None and self.negatives >= self.k:
            raise ValueError(
                f"negatives must be smaller than k ({self.negatives} >= {self.k})"
            )
        if any(width < 1 for width in self.hidden_dims):
            raise ValueError("hidden_dims entries must be >= 1")
        return self

    @property
    def m(self) -> int:
        """Resolved hard-negative count."""
        if self.negatives is not None:
            return self.negatives
        return min(-(-self.k // 2), self.k - 1)


class EvalConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k_eval: int = Field(5, ge=1, description="Neighbors voting in kNN evaluation")


class DatasetSource(BaseModel):
    """Where training (and optionally test) features come from"""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["blobs", "csv", "idx"] = Field("blobs", description="Dataset source type")
    path: str | None = Field(None, description="CSV file or IDX images file")
    labels_path: str | None = Field(None, description="IDX labels file")
    test_path: str | None = Field(None, description="Separate test CSV/IDX images file")
    test_labels_path: str | None = Field(None, description="Separate test IDX labels file")
    has_header: bool = Field(False, description="CSV files start with a header row")
    label_column: int | None = Field(None, ge=0, description="CSV column holding labels")
    test_size: int = Field(
        150, ge=0, description="Held-out instances when no separate test file is given"
    )
    num_classes: int = Field(3, ge=1, description="Blob classes")
    per_class: int = Field(150, ge=1, description="Blob instances per class")
    d_in: int = Field(16, ge=1, description="Blob feature dimension")
    center_radius: float = Field(5.0, gt=0, description="Distance of blob centers from the origin")
    noise_sigma: float = Field(0.5, gt=0, description="Per-coordinate blob noise")
    seed: int | None = Field(None, ge=0, description="Dataset seed (unset: the training seed)")

    @model_validator(mode="after")
    def _check_paths(self):
        if self.kind != "blobs" and not self.path:
            raise ValueError(f"dataset.path is required for kind '{self.kind}'")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = Field("runs", description="Directory receiving all run artifacts")
    metrics_file: str = Field("metrics.jsonl", description="Training metrics file name")
    checkpoint_file: str = Field("checkpoint.npz", description="Checkpoint file name")
    ablation_file: str = Field("ablation.jsonl", description="Ablation records file name")
    export_file: str = Field("embeddings.txt", description="Embedding export file name")
    trace_file: str = Field("trace.jsonl", description="Neighbor trace file name")


class AblationGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strategies: list[Strategy] = Field(
        default_factory=lambda: [Strategy.BFS, Strategy.DFS, Strategy.GREEDY],
        description="Strategies to compare",
    )
    ks: list[int] = Field(default_factory=lambda: [1, 2, 4, 8], description="Neighbor sizes")
    reset_policies: list[ResetPolicy] = Field(
        default_factory=lambda: [ResetPolicy.EVERY_STEP], description="Reset policies"
    )
    negatives: list[int] | None = Field(
        None, description="Hard-negative counts (unset: the default derived from each k)"
    )
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4], description="Run seeds")
    workers: int = Field(1, ge=1, description="Parallel worker processes")

    @model_validator(mode="after")
    def _check_axes(self):
        for name in ("strategies", "ks", "reset_policies", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"ablation.{name} must not be empty")
        if any(k < 1 for k in self.ks):
            raise ValueError("ablation.ks entries must be >= 1")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    dataset: DatasetSource = Field(default_factory=DatasetSource)
    output: OutputConfig = Field(default_factory=OutputConfig)
    ablation: AblationGrid = Field(default_factory=AblationGrid)

    @property
    def dataset_seed(self) -> int:
        return self.dataset.seed if self.dataset.seed is not None else self.train.seed


class ConfigRecord(BaseModel):
    kind: Literal["config"] = "config"
    train: TrainConfig
    eval: EvalConfig
    dataset: DatasetSource


class EpochRecord(BaseModel):
    kind: Literal["epoch"] = "epoch"
    epoch: int
    lr: float
    loss: float
    instance_term: float
    positive_term: float
    negative_term: float
    # logged, kept out of metrics files so identical runs give identical files
    wall_time: float = Field(0.0, exclude=True)


class SummaryRecord(BaseModel):
    kind: Literal["summary"] = "summary"
    epochs: int
    final_loss: float | None
    accuracy: float | None
    train_size: int
    test_size: int


class AblationCellRecord(BaseModel):
    kind: Literal["ablation_cell"] = "ablation_cell"
    strategy: Strategy
    k: int
    negatives: int
    reset_policy: ResetPolicy
    seeds: list[int]
    accuracies: list[float]
    mean: float
    std: float
    neighbor_purity: float | None = None


class TraceSummaryRecord(BaseModel):
    kind: Literal["trace_summary"] = "trace_summary"
    strategy: Strategy
    k: int
    negatives: int
    queries: int
    similarity_by_rank: list[float]
    purity: float | None = None
    purity_by_rank: list[float] | None = None
