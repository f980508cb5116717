"""Safety-monotone dose escalation: tally orders, the 3+3 protocol, and
its right-Kan and lower-Galois extensions with a rolling-enrollment simulator."""

from .tally import (EnrolledState, Tally, dose_intensities, pessimize,
                    sigma_embed, sigma_invert, tally_add, toxicity_profile)
from .order import (DeltaCoords, HasseEdges, SafetyParams, delta_coords,
                    hasse_dot, join, leq, leq0, maximal_elements, meet,
                    monotonicity_violations, transitive_reduction)
from .protocol33 import (ProtocolTable, enumerate_protocol, final_rec,
                         outcome_probabilities, path_probability, rectify)
from .extension import (GaloisRule, KanRule, build_galois, build_kan,
                        galois_recommend, kan_recommend)
from .simulator import (Scenario, TrialResult, replicate, run_trial,
                        sample_arrivals, tox_probabilities)

__version__ = "0.1.0"
