"""bgklab: desk-scale experiments on exponential sums over small
multiplicative subgroups of prime fields.

The library builds every constructive object of the subject explicitly:
densities on F_p and their characteristic functions, stepping and peaking,
representation functions and energy, large-energy subset extraction, the
structured-set pipeline, and the alternating subgroup walk, each with
numerically verified identities and exact certified inequalities.
"""

from .budget import BudgetError, get_budget
from .bsg import BsgCertificate, bsg, find_pivot
from .dist import (
    CharFn,
    DistFp,
    PeakDist,
    char_fn,
    char_value,
    density_at,
    dirac,
    peaking,
    peaking_of_char,
    random_density,
    stepping,
    uniform_on,
    verify_fourier_duality,
)
from .extract import (
    ConditionsFailError,
    ExtractCertificate,
    alt1_report,
    check_lemma_energy,
    check_lemma_stepping,
    extract_structured,
    twisted_fourth_moment,
    verify_link2,
)
from .fields import (
    GroupCtx,
    PrimeField,
    Subgroup,
    cosets,
    group_inv,
    group_op,
    is_prime,
    primitive_root,
    subgroup_of_order,
)
from .report import Report, write_csv
from .rng import SplitMix64
from .sets import (
    ExpansionStats,
    FpSet,
    RepFn,
    energy,
    expansion_stats,
    inv_set,
    normalized_energy,
    op_set,
    rep_fn,
)
from .walk import (
    ScanRow,
    SearchResult,
    Spectrum,
    WalkSpec,
    final_chain_report,
    gauss_sum,
    search_k_nu,
    spectrum,
    subgroup_char_sum,
    theorem_scan,
    verify_expansion_inequality,
    walk_char_fn,
    walk_density,
)

__version__ = "0.1.0"
