from prometheus_client import Counter


# Tasks served by the API, labeled by task name
TASKS_TOTAL = Counter(
    "spikelab_tasks_total",
    "Total number of computation tasks requested",
    ["task"],
)


# Failed tasks, labeled by task and exception class
TASK_FAILURES = Counter(
    "spikelab_task_failures_total",
    "Number of tasks that ended in a precondition or numerical error",
    ["task", "kind"],
)


CRITICAL_POINTS = Counter(
    "spikelab_critical_points_total",
    "Critical points reported by the predictor",
    ["classification"],
)
