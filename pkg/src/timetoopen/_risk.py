"""Risk-set bookkeeping shared by the estimators (Breslow tie convention)."""
import numpy as np


class RiskSets:
    """Sorted view of ``(time, event)`` data.

    Rows are sorted by time; the risk set of event time ``t_j`` is every row
    with ``time >= t_j``, i.e. sorted positions ``start[j]`` onwards. All rows
    tied at ``t_j`` share that risk set.
    """

    def __init__(self, time, event, weight=None):
        time = np.asarray(time, dtype=np.float64)
        event = np.asarray(event, dtype=bool)
        self.n = time.shape[0]
        self.order = np.argsort(time, kind="stable")
        self.time = time[self.order]
        self.event = event[self.order]
        if weight is None:
            self.weight = np.ones(self.n)
        else:
            self.weight = np.asarray(weight, dtype=np.float64)[self.order]
        self.event_times = np.unique(self.time[self.event])
        self.start = np.searchsorted(self.time, self.event_times, side="left")
        # event time index of every sorted event row
        self.event_rows = np.flatnonzero(self.event)
        self.event_group = np.searchsorted(self.event_times, self.time[self.event_rows])
        # last event time whose risk set contains each sorted row (-1: none)
        self.row_group = np.searchsorted(self.start, np.arange(self.n), side="right") - 1
        self._count_events()

    def _count_events(self):
        self.n_events = np.bincount(self.event_group, weights=self.weight[self.event_rows],
                                    minlength=self.event_times.shape[0])

    def set_weight(self, weight):
        """Replace the row weights (given in the original row order)."""
        self.weight = np.asarray(weight, dtype=np.float64)[self.order]
        self._count_events()

    def at_risk(self, values):
        """Sum of sorted ``values`` over each event time's risk set (axis 0)."""
        values = np.asarray(values)
        if self.start.size == 0:
            return np.zeros((0,) + values.shape[1:], dtype=values.dtype)
        # block sums between consecutive event times, then a short reverse cumsum
        blocks = np.add.reduceat(values, self.start, axis=0)
        return np.cumsum(blocks[::-1], axis=0)[::-1]

    def accumulate(self, group_values):
        """Per sorted row, the sum of ``group_values`` over risk sets containing it."""
        acc = np.r_[0.0, np.cumsum(group_values)]
        return acc[self.row_group + 1]

    def group_of(self, t):
        """Index of the last event time ``<= t`` (-1 before the first)."""
        return np.searchsorted(self.event_times, t, side="right") - 1
