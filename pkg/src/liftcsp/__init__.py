"""liftcsp: homomorphisms, monadic lifts and shadows, finite dualities and
forbidden-pattern classification for finite relational structures."""

from liftcsp.errors import (
    BudgetExceededError,
    ConstructionError,
    FormatError,
    LiftcspError,
    SearchBoundsError,
    SignatureMismatchError,
    SparsificationError,
    ValidationError,
)
from liftcsp.structures import (
    DIGRAPH,
    GRAPH,
    IncidenceMultigraph,
    IncidenceReport,
    RelationSpec,
    Signature,
    Structure,
    canonical_form,
    canonical_key,
    components,
    empty_structure,
    enumerate_structures,
    incidence_analysis,
    incidence_multigraph,
    isomorphic,
    parse_structure,
    product,
    serialize_structure,
    terminal_structure,
)
from liftcsp.hom import CoreResult, Hom, core, find_hom, hom_equivalent, is_hom
from liftcsp.lifts import (
    ForbFamily,
    Lift,
    forb_member,
    pullback_lift,
    shadow,
    shadow_member,
)
from liftcsp.duality import (
    DualBounds,
    DualCandidate,
    DualityReport,
    csp_member,
    dual_of_tree,
    dual_set_of_family,
    tree_dual_construction,
    verify_duality,
    verify_shadow_duality,
)
from liftcsp.classify import (
    ClassificationReport,
    ClassifyBounds,
    RefuteBounds,
    RefutationResult,
    classify,
    normalize_family,
    refute_dual,
)
from liftcsp.sparse import SparseRequest, SparseResult, sparsify
from liftcsp.families import k_coloring_family, local_coloring_family
from liftcsp.kernels import backend_name

__version__ = "0.1.0"
