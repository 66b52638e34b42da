"""Pattern-based generalization of process models against event logs."""
from .align import Alignment, Step, align, brute_force_align, cost, trace_projection
from .concurrency import (ConcurrencyRelation, PartialOrder, alpha_oracle, alpha_plus_oracle,
                          directly_follows, explicit_oracle, filter_df, to_partial_order,
                          unique_partial_orders)
from .eventlog import EventLog, parse_csv, parse_xes, read_log
from .measure import Config, GeneralizationReport, aggregate, generalization
from .patterns import (concurrent_fulfilment_interleavings, concurrent_fulfilment_partial,
                       define_repetitive_patterns, representative_traces_and_patterns)
from .petri import PetriNet, SystemNet, enabled, fire, parse_pnml, read_pnml, validate
from .tandem import (TandemRepeat, detect_tandem_repeats, extend_log, extend_trace,
                     reduce_log, reduce_trace)

__version__ = "0.1.0"
