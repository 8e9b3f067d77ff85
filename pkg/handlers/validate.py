import json

from handlers.router import Router
from handlers.run import config_overrides
from utils.errors import InvalidConfig
from utils.validators import validate_config

router = Router()


@router.command("validate", help="Проверить файл конфигурации и оценить стоимость")
def cmd_validate(args):
    """Обработчик подкоманды validate: без побочных эффектов"""
    if not args.config:
        raise InvalidConfig("для validate требуется --config", field="config")
    report = validate_config(args.config, config_overrides(args))
    print(json.dumps({"status": "ok", **report}, indent=2, ensure_ascii=False))
