"""Federated privacy-preserving frequent-itemset mining.

Data owners double-encrypt their baskets and split them horizontally across
intermediate cloud servers. Each server mines its block with a capped-count
Apriori, and a computing server aggregates the local reports into global
frequent itemsets and association rules.
"""

from ppfim.crypto import DoubleEncryptionKey, decrypt_item, encrypt_database, encrypt_item
from ppfim.dataset import (
    DatasetStats,
    Transaction,
    TransactionDatabase,
    db_stats,
    generate_synthetic,
    parse_basket_file,
    serialize_basket_file,
)
from ppfim.federation import GlobalMiningResult, PipelineConfig, RunMetrics, run_pipeline
from ppfim.miner import classic_apriori, mine_local
from ppfim.splitter import PartitionAssignment, split

__version__ = "0.1.0"

__all__ = [
    "DatasetStats",
    "DoubleEncryptionKey",
    "GlobalMiningResult",
    "PartitionAssignment",
    "PipelineConfig",
    "RunMetrics",
    "Transaction",
    "TransactionDatabase",
    "classic_apriori",
    "db_stats",
    "decrypt_item",
    "encrypt_database",
    "encrypt_item",
    "generate_synthetic",
    "mine_local",
    "parse_basket_file",
    "run_pipeline",
    "serialize_basket_file",
    "split",
]
