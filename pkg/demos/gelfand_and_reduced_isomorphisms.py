"""From a bundle of coefficient functions to its groupoid model and back.

The flip bundle (the two-element group exchanging two points) produces a
transformation groupoid with four germs; its section algebra is the full
2x2 matrix algebra.  The script walks the whole chain: germs, line-bundle
structure constants, the fiberwise Gelfand identification, the kernel of
the summation map, and the unitary matching of the two reduced norms.
"""

from germlab.convalg import (
    kernel_equals_ideal,
    reduced_norm,
    unit_section,
    verify_reduced_iso,
)
from germlab.fixtures import semilattice_01_bundle, z2_flip_bundle
from germlab.germgpd import build_germ_groupoid
from germlab.linebundle import build_line_bundle, verify_gelfand_iso

for name, bundle in (("flip", z2_flip_bundle()), ("semilattice", semilattice_01_bundle())):
    print(f"=== {name} bundle ===")
    g = build_germ_groupoid(bundle.action)
    l = build_line_bundle(bundle, g)
    print("germs:", list(g.germs), " units:", sorted(map(repr, g.units)))

    gelf = verify_gelfand_iso(bundle, l)
    print("fiberwise Gelfand identification:", "ok" if gelf.ok else gelf.failures)

    ker = kernel_equals_ideal(bundle, l)
    print(f"kernel of the summation map: dim {ker.dim_kernel} "
          f"(= inclusion-ideal dim {ker.dim_ideal})")

    red = verify_reduced_iso(bundle, l, n_random=100)
    print("reduced-norm match over 100 random elements:",
          "ok" if red.ok else red.failures)
    print(f"reduced algebra: dim {red.algebra_dim}, center dim {red.center_dim}")
    print("norm of the unit section:", reduced_norm(l, unit_section(l)))
    print()
