import json

from config import EXPERIMENT_DEFAULTS, EXPERIMENT_DESCRIPTIONS
from handlers.router import Router
from models.experiment import ExperimentId

router = Router()


@router.command("list", help="Показать доступные эксперименты")
def cmd_list(args):
    """Обработчик подкоманды list"""
    for experiment in ExperimentId:
        print(f"{experiment.value:8s} {EXPERIMENT_DESCRIPTIONS[experiment.value]}")
        print(f"         {json.dumps(EXPERIMENT_DEFAULTS[experiment.value], ensure_ascii=False)}")
