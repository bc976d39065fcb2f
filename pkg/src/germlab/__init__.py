"""germlab: groupoids of germs, Fell line bundles and convolution algebras
from finite inverse-semigroup bundle data.

The pipeline: a multiplication table and an action by partial
homeomorphisms present a bundle of coefficient functions (optionally
twisted by a circle cocycle); from it the package constructs the groupoid
of germs with an exact Hausdorffness decision, the associated line bundle
and circle extension, and the convolution *-algebras with their regular
representations, checking the structural identifications numerically at
pinned tolerances.
"""

from germlab.invsgp import (
    InverseSemigroup,
    adjoin_zero,
    idempotents,
    is_continuous,
    natural_order,
    validate_inverse_semigroup,
)
from germlab.spaces import (
    Action,
    AffinePiece,
    DiscreteMap,
    DiscreteSet,
    DiscreteSpace,
    IntervalSpace,
    Piece,
    PiecewiseAffineMap,
    RationalSet,
    closure,
    compose_partial,
    frac,
    identity_on,
    validate_action,
)
from germlab.fellbundle import (
    Cocycle,
    FellBundle,
    FiberElement,
    GroupoidPresentation,
    TwistedActionPresentation,
    build_bundle,
    eqx,
    is_saturated,
    is_semi_abelian,
    theta_from_element,
    theta_s,
    validate_axioms,
)
from germlab.germgpd import (
    BasicOpen,
    FiniteGroupoid,
    Germ,
    GermCell,
    bissection_Os,
    build_germ_groupoid,
    germ_equal,
    is_hausdorff,
    is_wide,
    is_wide_family,
    map_s_to_Os_injective,
)
from germlab.linebundle import (
    LineBundle,
    LineElement,
    Twist,
    build_line_bundle,
    build_twist,
    gelfand,
    line_norm,
    round_trip,
    triples_equivalent,
    verify_gelfand_iso,
)
from germlab.convalg import (
    BundleAlgebraElement,
    Representation,
    Section,
    convolve,
    expectation_onto_units,
    kernel_equals_ideal,
    psi_map,
    reduced_norm,
    regular_rep,
    state_phi_x,
    state_phitilde,
    verify_reduced_iso,
)
from germlab.cartanlab import (
    GridModel,
    WeightFunction,
    build_worked_example,
    embed_fibers,
    expectation_E,
    verify_conditional_expectation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
