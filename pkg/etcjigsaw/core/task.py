# task.py
# Copyright 2017 EtC Jigsaw Workbench developers
# Licence: See LICENCE (BSD licence)

"""Provide Task class which runs a function over independent jobs.

The jobs are run in the current process when one worker is allowed, and
by a bounded pool of processes otherwise.  Results are returned in job
order whatever order the workers finish in.

"""
import multiprocessing
import os

from . import constants


class TaskError(Exception):
    """Exception class for task module."""


def worker_count(option=None, configured=None):
    """Return number of workers allowed.

    The option, usually from the command line, wins over the environment
    variable named by WORKERS_ENVIRONMENT_VARIABLE, which wins over the
    configured value.  The default is 1.

    """
    for source, value in (
        ("option", option),
        (
            constants.WORKERS_ENVIRONMENT_VARIABLE,
            os.environ.get(constants.WORKERS_ENVIRONMENT_VARIABLE),
        ),
        ("configuration", configured),
    ):
        if value is None or value == "":
            continue
        try:
            workers = int(value)
        except ValueError:
            raise TaskError(
                "".join(
                    ("Worker count '", str(value), "' from ", source, " bad")
                )
            ) from None
        if workers < 1:
            raise TaskError(
                "".join(("Worker count from ", source, " must be at least 1"))
            )
        return workers
    return 1


class Task:
    """Run target on each job directly or in a pool of processes.

    target is a module level function taking one job.
    jobs is a sequence of picklable arguments.
    workers is the largest number of processes to use.

    """

    def __init__(self, target, jobs, workers=1):
        """Set function, jobs, and pool size."""
        self._target = target
        self._jobs = list(jobs)
        self._workers = max(1, min(workers, len(self._jobs)))

    def run(self):
        """Return list of target results in job order."""
        if self._workers == 1:
            return [self._target(job) for job in self._jobs]
        with multiprocessing.Pool(self._workers) as pool:
            return pool.map(self._target, self._jobs, chunksize=1)
