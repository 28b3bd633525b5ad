import os
import math
import hashlib
import json

import torch


class ConfigError(ValueError):
    """Invalid configuration, parameters or inputs (CLI exit code 2)"""


class NumericalError(RuntimeError):
    """Non-finite values or a diverging iteration (CLI exit code 3)"""


def make_folder(folder_name):
    if not os.path.exists(folder_name):
        os.makedirs(folder_name)
    # or os.makedirs(folder_name, exist_ok=True)


def file_checksum(path):
    """SHA-256 of a file's bytes"""
    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 20), b''):
            sha.update(chunk)
    return sha.hexdigest()


def config_hash(config_dict):
    """Stable hash of a json-serialisable configuration"""
    payload = json.dumps(config_dict, sort_keys=True, default=str).encode('utf-8')
    return hashlib.sha256(payload).hexdigest()


class AverageMeter(object):
    """Computes and stores the average and current value"""

    def __init__(self, name, fmt=':f'):
        self.name = name
        self.fmt = fmt
        self.reset()

    def reset(self):
        self.val = 0
        self.avg = 0
        self.sum = 0
        self.count = 0

    def update(self, val, n=1):
        self.val = val
        self.sum += val * n
        self.count += n
        self.avg = self.sum / self.count

    def __str__(self):
        fmtstr = '{name} {val' + self.fmt + '} ({avg' + self.fmt + '})'
        return fmtstr.format(**self.__dict__)


class ProgressMeter(object):
    def __init__(self, num_iters, meters, prefix=""):
        self.iter_fmtstr = self._get_iter_fmtstr(num_iters)
        self.meters = meters
        self.prefix = prefix

    def get_message(self, iteration):
        entries = [self.prefix + self.iter_fmtstr.format(iteration)]
        entries += [str(meter) for meter in self.meters]
        return '\t'.join(entries)

    def _get_iter_fmtstr(self, num_iters):
        num_digits = len(str(num_iters // 1))
        fmt = '{:' + str(num_digits) + 'd}'
        return '[' + fmt + '/' + fmt.format(num_iters) + ']'


def json_safe(obj):
    """Recursively turn a report into plain json types; infinities become the strings 'inf' / '-inf'"""
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, torch.Tensor):
        return json_safe(obj.tolist())
    if hasattr(obj, 'tolist'):
        return json_safe(obj.tolist())
    if isinstance(obj, float) and math.isinf(obj):
        return 'inf' if obj > 0 else '-inf'
    if isinstance(obj, torch.device):
        return str(obj)
    return obj


def provenance_path(path):
    return os.path.splitext(path)[0] + '_provenance.json'


def write_provenance(path, provenance):
    """Sibling json of a csv artifact: its checksum and the provenance block of the run that wrote it"""
    payload = {'file': os.path.basename(path), 'checksum': file_checksum(path), 'provenance': provenance}
    with open(provenance_path(path), 'w') as f:
        json.dump(json_safe(payload), f, indent=2, sort_keys=True)
