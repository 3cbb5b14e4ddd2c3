"""Dataset ingestion, feature maps, partitioning and synthetic generators."""

from src.data.dataset import Dataset, Shard, pool_shards
from src.data.features import FeatureMap, FeatureMapKind, apply_feature_map, make_feature_map
from src.data.libsvm import load_libsvm, normalize_binary_labels, parse_libsvm, write_libsvm
from src.data.partition import PartitionPlan, PartitionStrategy, partition, train_test_split
from src.data.synthetic import synth_logistic, synth_ridge

__all__ = [
    "Dataset",
    "FeatureMap",
    "FeatureMapKind",
    "PartitionPlan",
    "PartitionStrategy",
    "Shard",
    "apply_feature_map",
    "load_libsvm",
    "make_feature_map",
    "normalize_binary_labels",
    "parse_libsvm",
    "partition",
    "pool_shards",
    "synth_logistic",
    "synth_ridge",
    "train_test_split",
    "write_libsvm",
]
