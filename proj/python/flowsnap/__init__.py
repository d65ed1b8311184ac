"""Streaming TCP process-model snapshots and desk-scale intrusion detectors."""

from flowsnap._core import (  # noqa: F401
    ATTACK_LABEL,
    NORMAL_LABEL,
    NUM_EVENT_CLASSES,
    NUM_RELATIONS,
    AttackTable,
    BalanceMode,
    ConfusionMatrix,
    Direction,
    EventClass,
    FlagSet,
    FlowsnapError,
    HbosModel,
    KnnModel,
    LabeledDataset,
    MndModel,
    PacketRecord,
    PcaModel,
    Preprocessor,
    RocCurve,
    Snapshot,
    StreamStats,
    SynthKind,
    SynthProfile,
    auc_rank_statistic,
    balance,
    class_from_index,
    class_index,
    class_name,
    event_class,
    f1_score,
    flatten,
    generate,
    kfold_split,
    load_model_file,
    merge_streams,
    parse_flags,
    read_packets_file,
    read_snapshots_file,
    roc_curve,
    save_model_file,
    write_packets_file,
    write_snapshots_file,
    __version__,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
