"""
Workflow Manager for laboratory runs
Tracks the sequential stages of one CLI command so failures name their stage
"""

import logging

logger = logging.getLogger(__name__)


class ExperimentWorkflow:
    """Manages the staged workflow of one experiment run"""

    # Workflow stages in run order
    WORKFLOW_STAGES = {
        1: {
            'name': 'Load Config',
            'description': 'Parsing and validating the run configuration'
        },
        2: {
            'name': 'Build Kernel',
            'description': 'Constructing and validating the micromodulus'
        },
        3: {
            'name': 'Build Profile',
            'description': 'Deriving moments, wave speed and psi'
        },
        4: {
            'name': 'Compute',
            'description': 'Running the experiment'
        },
        5: {
            'name': 'Checks',
            'description': 'Evaluating acceptance checks'
        },
        6: {
            'name': 'Write Artifacts',
            'description': 'Writing CSV files and the summary'
        }
    }

    def __init__(self, command):
        """Initialize workflow stages for a new run"""
        self.command = command
        self.current_stage = 0
        self.status = 'waiting'
        self.error_message = None
        self.stages = {}
        for stage_num, stage_info in self.WORKFLOW_STAGES.items():
            self.stages[stage_num] = {
                'name': stage_info['name'],
                'description': stage_info['description'],
                'status': 'waiting',  # waiting, processing, complete, skipped, error
                'error_message': None
            }

    def stage_number(self, name):
        for stage_num, stage_info in self.WORKFLOW_STAGES.items():
            if stage_info['name'] == name:
                return stage_num
        raise KeyError(f"Invalid stage name: {name}")

    def start_stage(self, stage_number):
        """Start a workflow stage, completing any earlier ones"""
        if stage_number not in self.stages:
            raise KeyError(f"Invalid stage number: {stage_number}")

        for i in range(1, stage_number):
            if self.stages[i]['status'] == 'waiting':
                self.stages[i]['status'] = 'skipped'
            elif self.stages[i]['status'] == 'processing':
                self.complete_stage(i)

        self.stages[stage_number]['status'] = 'processing'
        self.current_stage = stage_number
        self.status = 'processing'
        logger.info(f"[{self.command}] Started stage {stage_number} ({self.WORKFLOW_STAGES[stage_number]['name']})")

    def complete_stage(self, stage_number):
        """Complete a workflow stage"""
        self.stages[stage_number]['status'] = 'complete'
        if stage_number == max(self.WORKFLOW_STAGES):
            self.status = 'completed'
        logger.debug(f"[{self.command}] Completed stage {stage_number} ({self.WORKFLOW_STAGES[stage_number]['name']})")

    def error_stage(self, stage_number, error_message):
        """Mark a workflow stage as failed"""
        self.stages[stage_number]['status'] = 'error'
        self.stages[stage_number]['error_message'] = error_message
        self.status = 'error'
        self.error_message = f"Stage {stage_number} ({self.WORKFLOW_STAGES[stage_number]['name']}): {error_message}"
        logger.error(f"[{self.command}] {self.error_message}")

    def run_stage(self, name, func, *args, **kwargs):
        """Run func inside the named stage; errors are recorded and re-raised"""
        stage_number = self.stage_number(name)
        self.start_stage(stage_number)
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            self.error_stage(stage_number, str(e))
            raise
        self.complete_stage(stage_number)
        return result

    @property
    def failed_stage(self):
        for stage_num, stage in self.stages.items():
            if stage['status'] == 'error':
                return stage['name']
        return None

    def get_workflow_status(self):
        """Get current workflow status"""
        return {
            'command': self.command,
            'current_stage': self.current_stage,
            'status': self.status,
            'error_message': self.error_message,
            'stages': {self.WORKFLOW_STAGES[n]['name']: stage['status'] for n, stage in self.stages.items()},
            'total_stages': len(self.WORKFLOW_STAGES)
        }
