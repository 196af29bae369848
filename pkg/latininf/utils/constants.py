"""Constants for search budgets, tolerances, and persistence."""

# Persistence format; bump on any incompatible artifact change.
FORMAT_VERSION = 1

ARTIFACT_KINDS = {
    "terrace", "mapping", "family", "immune-region", "vatican-region",
    "region", "report",
}

# Group classification values
SQUAREFUL = "squareful"
ALL_INVOLUTIONS = "all-involutions"
OTHER = "other"

# Index set kinds
INDEX_KINDS = {"N", "Z", "Q"}

# Terrace kinds: T (plain), S (semi, one of each inverse pair), R (onto G minus e)
TERRACE_KINDS = {"T", "S", "R"}

# First-fit candidates tried before a meet rule gives up (ExtensionFailed)
SEARCH_BUDGET = 10**6

# Quadruple tests before find_quadrangle_violation gives up
QUADRANGLE_CAP = 10**7

# Largest group brute_force_scm_search will scan (9! permutations)
BRUTE_FORCE_CAP = 9

# verify_immune is factorial in the column count
IMMUNE_MAX_COLS = 7

# Exhaustive SCM certification of the E2 field block: m <= 2 (16 elements);
# safety-only up to m <= 4 (65536 elements)
FIELD_EXHAUSTIVE_MAX_M = 2
FIELD_SAFETY_MAX_M = 4

# Real-line numerics
DEFAULT_TOL = 1e-10
BISECTION_MAX_ITER = 200
BRACKET_MAX_DOUBLINGS = 1100

# Per-step growth bounds audited against BuildLog.max_growth
TERRACE_MAX_GROWTH = 2
MAPPING_MAX_GROWTH = 1
FAMILY_MAX_GROWTH = 2       # E_ij steps extend two mappings at once

# Parallel verifier workers; LATININF_JOBS / --jobs override
DEFAULT_JOBS = 1
