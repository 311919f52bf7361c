from .helpers import delete_run, list_runs, load_run, plan_benchmark, sample_tasks

__all__ = ["delete_run", "list_runs", "load_run", "plan_benchmark", "sample_tasks"]
