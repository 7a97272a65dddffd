import os
import sys

from django.core.management import execute_from_command_line

if __name__ == '__main__':
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'kronred.settings')
    execute_from_command_line(['kronred', *sys.argv[1:]])
