# Пустой файл для обозначения директории как пакета Python
