"""Constants for trojanrec."""
COUNTER_LINES = "lines"
COUNTER_EVENTS = "events"
COUNTER_DUPLICATES = "duplicates"
COUNTER_USERS_REMOVED = "users_removed"
COUNTER_ITEMS_REMOVED = "items_removed"
COUNTER_CELLS = "cells"
COUNTER_CELLS_FAILED = "cells_failed"

# data
DEFAULT_MIN_USER = 5
DEFAULT_MIN_ITEM = 5
DEFAULT_N_CLUSTERS = 10
DEFAULT_TEST_FRACTION = 0.1
HEAD_FRACTION = 0.05
UPPER_TORSO_FRACTION = 0.25
LOWER_TORSO_FRACTION = 0.50
FAKE_USER_PREFIX = "fake"

# models
DEFAULT_LATENT_DIM = 64
DEFAULT_L2_WEIGHT = 0.01
DEFAULT_C_POS = 20.0
DEFAULT_BETA_KL = 0.2
INIT_SCALE = 0.01

# attack
DEFAULT_POISONING_RATIO = 0.001
DEFAULT_ALPHA = 0.5
DEFAULT_ETA = 1.0
DEFAULT_T_ADV = 50
DEFAULT_T_SUB = 100
DEFAULT_CANDIDATE_CAP = 500
DEFAULT_TRIGGER_BATCH = 512
DEFAULT_TOP_K = 20
POISON_INIT_VALUE = 0.5

# evaluation
DEFAULT_K_LIST = (10, 20, 50)
HR_DECIMALS = 4

# detect
DEFAULT_DAMPING = 0.5
DEFAULT_ITERATIONS = 10

# harness
LOG_ENV = "TROJANREC_LOG"
DATASET_HEADER = "# trojanrec-dataset 1"
CHECKPOINT_VERSION = 1
FILE_DATASET = "dataset.txt"
FILE_POISONED = "poisoned.txt"
FILE_LABELS = "labels.tsv"
FILE_TRACE = "trace.jsonl"
FILE_ATTACK = "attack.json"
FILE_REPORTS = "reports.jsonl"
FILE_TIMINGS = "timings.jsonl"
FILE_TABLE = "table.csv"
FILE_DETECTION = "detection.tsv"
FILE_DETECTION_SUMMARY = "detection.json"
FILE_MANIFEST = "manifest.json"
