"""Rotation-masked arcs of generic points in shift spaces with a safe symbol."""

__version__ = "0.1.0"

from .sequence import (Alphabet, FixedFraction, RotationCoding, Window, disagreement_density,
                       running_density, star_product, sturmian_window)
from .families import (BAdmissible, Beta, BFree, BoundedDensity, Full, SFT, Spacing, Verdict,
                       bfree_characteristic, count_words, hereditary_closure, heredity_check,
                       is_admissible, safe_symbol_check, topological_entropy_estimate)
from .transport import (BlockDistribution, TransportPlan, dbar_blocks, dbar_ladder,
                        empirical_blocks, tv_distance)
from .entropy import (EntropyProfile, block_entropy, entropy_estimate, fano_bound,
                      lz_entropy_estimate)
from .arc import (ArcSample, Bernoulli, FileSource, Markov, SftParry, arc_point, arc_sweep,
                  bisect_entropy, parry_measure, product_genericity_diagnostic, sample_generic,
                  select_alpha)
