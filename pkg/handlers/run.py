import json
import logging

from handlers.router import Router
from services.experiment_service import run_experiment
from utils.errors import InvalidConfig
from utils.validators import build_config, load_config_file

logger = logging.getLogger(__name__)

router = Router()


def config_overrides(args) -> dict:
    return {"seed": args.seed, "out_dir": args.out, "jobs": args.jobs}


@router.command(
    "run",
    help="Запустить эксперимент и записать CSV/SVG",
    arguments=[(("--experiment",), {"help": "Идентификатор эксперимента (если нет --config)"})],
)
def cmd_run(args):
    """Обработчик подкоманды run"""
    if args.config:
        raw = load_config_file(args.config)
        if args.experiment:
            raw["experiment"] = args.experiment
    elif args.experiment:
        raw = {"experiment": args.experiment}
    else:
        raise InvalidConfig("укажите --config или --experiment", field="experiment")

    config = build_config(raw, config_overrides(args))
    manifest = run_experiment(config)
    print(json.dumps({"out_dir": config.out_dir, "files": manifest}, indent=2))
